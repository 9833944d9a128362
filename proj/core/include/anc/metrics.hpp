#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "anc/signal.hpp"

namespace anc {

/// dB ratio that may be unbounded (zero denominator) or undefined (0/0).
struct Level {
  enum class Kind { Finite, Unbounded, Undefined };
  Kind kind = Kind::Undefined;
  double db = 0.0;

  static Level from_powers(double numerator, double denominator);
  bool finite() const noexcept { return kind == Kind::Finite; }
  friend bool operator==(const Level&, const Level&) = default;
};

std::string to_string(const Level& level);

inline constexpr double kDbFloor = -120.0;

/// Power ratio in dB clamped below at kDbFloor.
double clamp_db(double linear_power) noexcept;

/// NR_k = 10 log10(sum d^2 / sum e^2) over consecutive intervals. A trailing
/// partial interval is dropped. Positive values are attenuation.
std::vector<Level> noise_reduction_per_interval(const Signal& d, const Signal& e, double interval_s);
/// Multi-microphone form: powers are summed over microphones.
std::vector<Level> noise_reduction_per_interval(std::span<const Signal> d, std::span<const Signal> e,
                                                double interval_s);

/// 10 log10(P_d / P_e) over the full run.
Level snr_overall(const Signal& d, const Signal& e);
Level snr_overall(std::span<const Signal> d, std::span<const Signal> e);

/// One-sided averaged periodogram; `power[b]` is the signal power attributed
/// to bin b so that the bins sum to the mean squared value.
struct Spectrum {
  std::vector<double> freq_hz;
  std::vector<double> power;
  std::vector<double> power_db;  // clamped at kDbFloor
  std::size_t segments = 0;
};

/// Hann-windowed Welch estimate. `segment_len` must be a power of two no
/// longer than the signal; overlap is a fraction in [0, 1).
Spectrum power_spectrum(const Signal& x, std::size_t segment_len, double overlap);

struct Spectrogram {
  std::vector<double> frame_time_s;          // frame start / sample rate
  std::vector<double> freq_hz;
  std::vector<std::vector<double>> power_db;  // [frame][bin], clamped at kDbFloor
};

/// Hann-windowed STFT power in dB; frame_len a power of two, 0 < hop <= frame_len.
Spectrogram spectrogram(const Signal& x, std::size_t frame_len, std::size_t hop);

}  // namespace anc
