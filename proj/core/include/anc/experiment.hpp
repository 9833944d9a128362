#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anc/acoustics.hpp"
#include "anc/adaptation.hpp"
#include "anc/metrics.hpp"
#include "anc/signal.hpp"
#include "anc/weights_io.hpp"

namespace anc {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kSummarySchemaVersion = 1;
const char* version_string() noexcept;

// ---------------------------------------------------------------------------
// Configuration

struct ToneSpec {
  double freq_hz = 0.0;
  double amplitude = 1.0;
  double phase = 0.0;
};

/// Explicit taps or the synthetic decaying-exponential generator.
struct PathSpec {
  std::optional<std::vector<double>> taps;
  SyntheticPath synthetic;
};

struct NoiseSourceSpec {
  enum class Kind { Wav, Tone, BandNoise };
  std::string name;
  Kind kind = Kind::BandNoise;
  // tone
  double freq_hz = 0.0;
  double amplitude = 1.0;
  // band noise
  double low_hz = 0.0;
  double high_hz = 0.0;
  bool clip_to_nyquist = false;
  std::size_t filter_taps = 0;  // 0 selects a length from the sample rate
  std::vector<ToneSpec> tones;
  // wav
  std::filesystem::path path;
  /// Acoustic path from this source to the microphones; the plant's primary
  /// path when absent.
  std::optional<PathSpec> primary_path;
};

struct CompositionSpec {
  enum class Mode { Concatenate, Mix };
  Mode mode = Mode::Concatenate;
  std::vector<double> switch_times_s;
  std::vector<double> gains;
};

struct PlantSpec {
  PathSpec primary;
  PathSpec secondary;
  std::size_t sources = 1;  // J
  std::size_t mics = 1;     // K
  double measurement_noise_std = 0.0;
};

struct ControllerSpec {
  enum class Type { Single, Multichannel };
  /// Composite: one reference, the composed signal. PerSource: one reference
  /// sensor per noise source (multichannel only, I = number of sources).
  enum class Reference { Composite, PerSource };
  Type type = Type::Single;
  Reference reference = Reference::Composite;
  std::size_t taps = 128;    // N or L
  std::optional<double> mu;  // empty: auto
  double mu_scale = 0.1;
};

struct SysidSpec {
  enum class Mode { Exact, Identify };
  Mode mode = Mode::Exact;
  std::size_t taps = 64;  // M
  double mu = 0.01;
  std::size_t samples = 50000;
  double mismatch = 0.0;
};

struct FixedFilterSpec {
  std::size_t train_source = 0;
  double min_improvement_db = 0.1;
  double min_duration_s = 2.0;
  double max_duration_s = 60.0;
};

struct MetricsSpec {
  double interval_s = 1.0;
  std::size_t psd_segment = 1024;
  double psd_overlap = 0.5;
  std::size_t stft_frame = 1024;
  std::size_t stft_hop = 512;
  std::size_t decimation = 8;
  std::size_t trace_decimation = 80;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  double sample_rate_hz = 8000.0;
  double duration_s = 20.0;
  std::uint64_t seed = 1;
  std::vector<NoiseSourceSpec> noise_sources;
  CompositionSpec composition;
  PlantSpec plant;
  ControllerSpec controller;
  SysidSpec sysid;
  FixedFilterSpec fixed;
  MetricsSpec metrics;
  std::filesystem::path base_dir;  // relative WAV paths resolve against this
  std::string canonical;           // canonical JSON of the parsed file

  std::size_t total_samples() const;
};

/// Parses and validates a JSON config. Unknown keys, missing files and
/// inconsistent values throw ErrorKind::Config.
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical config text and the seed, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Signals

/// Seeded, unit-power synthesis of one source. Tones are unit-amplitude
/// sinusoids scaled by `amplitude`; band noise is windowed-sinc band-pass
/// filtered white noise plus optional tones, normalized to unit power.
Signal synthesize_noise(const NoiseSourceSpec& spec, double sample_rate_hz, double duration_s, std::uint64_t seed);

struct Composition {
  Signal reference;
  /// Gain-applied, positioned per-source parts; their in-order sample-wise
  /// sum is exactly `reference`.
  std::vector<Signal> components;
};

/// Concatenate: source s occupies [switch_{s-1}, switch_s) starting from its
/// first sample (sources abut back to back when no switch times are given).
/// Mix: gain-weighted sum renormalized to unit power.
Composition compose_components(std::span<const Signal> sources, const CompositionSpec& spec,
                               std::optional<std::size_t> length = std::nullopt);
Signal compose(std::span<const Signal> sources, const CompositionSpec& spec,
               std::optional<std::size_t> length = std::nullopt);

// ---------------------------------------------------------------------------
// Scenario

struct ArmReport {
  std::string name;
  std::vector<Signal> disturbance;  // uncontrolled microphone signals
  std::vector<Signal> error;        // controlled microphone signals
  std::vector<Level> nr_per_interval;
  std::vector<double> interval_disturbance_power;
  std::vector<double> interval_error_power;
  Level snr;
  double disturbance_power = 0.0;
  double error_power = 0.0;
  Spectrum psd;
  Spectrogram spectrogram;
  std::vector<double> mse_trace;
  bool diverged = false;
  std::optional<std::size_t> divergence_index;
  std::string divergence_message;
};

struct PretrainReport {
  std::size_t samples = 0;
  std::vector<Level> nr_per_interval;
  bool converged = false;
  double mu = 0.0;
};

struct SysidReport {
  std::size_t source = 0;
  std::size_t mic = 0;
  std::optional<double> misalignment_db;
  bool undermodeled = false;
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ScenarioResult {
  Provenance provenance;
  double sample_rate_hz = 0.0;
  double interval_s = 1.0;
  double mu = 0.0;
  std::vector<ArmReport> arms;  // uncontrolled, adaptive, fixed
  WeightSet adaptive_weights;
  WeightSet fixed_weights;
  ConvergenceTrace adaptive_trace;
  PretrainReport pretrain;
  std::vector<SysidReport> sysid;
  std::vector<std::string> warnings;

  bool any_diverged() const noexcept;
  const ArmReport* arm(const std::string& name) const noexcept;
};

struct ScenarioOptions {
  bool parallel_arms = false;
  /// Skip pre-training and use these weights for the fixed arm.
  std::optional<WeightSet> fixed_weights;
};

/// Secondary-path estimates per the sysid spec: exact copies of the plant's
/// paths (resized to M) or offline identification, then optional mismatch.
struct SecondaryEstimates {
  std::vector<std::vector<FirFilter>> estimates;  // J x K
  std::vector<SysidReport> reports;
};

/// The evaluation run's per-source signals and their composition, exactly as
/// run_scenario synthesizes them.
struct ScenarioSignals {
  std::vector<Signal> sources;
  Composition composition;
};
ScenarioSignals synthesize_scenario(const ExperimentConfig& cfg);

Plant build_plant(const ExperimentConfig& cfg);
SecondaryEstimates estimate_secondary_paths(const ExperimentConfig& cfg, const Plant& plant);

/// Runs only the fixed-filter pre-training protocol.
struct PretrainOutcome {
  WeightSet weights;
  PretrainReport report;
};
PretrainOutcome pretrain_fixed_filter(const ExperimentConfig& cfg, const Plant& plant,
                                      const SecondaryEstimates& estimates);

/// Optional identification, pre-training, then the uncontrolled, adaptive
/// and fixed arms on one shared disturbance realization.
ScenarioResult run_scenario(const ExperimentConfig& cfg, const ScenarioOptions& options = {});

// ---------------------------------------------------------------------------
// Summary

struct ArmSummary {
  std::string name;
  Level snr;
  std::vector<Level> nr_per_interval;
  std::vector<double> interval_disturbance_power;
  std::vector<double> interval_error_power;
  double disturbance_power = 0.0;
  double error_power = 0.0;
  bool diverged = false;
  std::optional<std::size_t> divergence_index;
  std::string divergence_message;
  friend bool operator==(const ArmSummary&, const ArmSummary&) = default;
};

struct ScenarioSummary {
  int schema_version = kSummarySchemaVersion;
  Provenance provenance;
  double sample_rate_hz = 0.0;
  double interval_s = 1.0;
  double mu = 0.0;
  std::vector<ArmSummary> arms;
  std::size_t pretrain_samples = 0;
  bool pretrain_converged = false;
  std::vector<SysidReport> sysid;
  std::vector<std::string> warnings;
  friend bool operator==(const ScenarioSummary&, const ScenarioSummary&) = default;
};

inline bool operator==(const SysidReport& a, const SysidReport& b) {
  return a.source == b.source && a.mic == b.mic && a.misalignment_db == b.misalignment_db &&
         a.undermodeled == b.undermodeled;
}

ScenarioSummary summarize(const ScenarioResult& result);
std::string summary_to_json(const ScenarioSummary& summary);
ScenarioSummary summary_from_json(const std::string& text);

}  // namespace anc
