#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "anc/error.hpp"
#include "anc/experiment.hpp"
#include "anc/mcanc.hpp"
#include "anc/sysid.hpp"

#ifndef ANC_VERSION
#define ANC_VERSION "0.0.0"
#endif

namespace anc {

const char* version_string() noexcept { return ANC_VERSION; }

namespace {

// Independent RNG streams per purpose, all derived from the config seed.
namespace stream {
constexpr std::uint64_t kPaths = 1;
constexpr std::uint64_t kEvalNoise = 2;
constexpr std::uint64_t kTrainNoise = 3;
constexpr std::uint64_t kMismatch = 4;
constexpr std::uint64_t kSource = 100;
constexpr std::uint64_t kTrainSource = 200;
constexpr std::uint64_t kSysid = 300;
}  // namespace stream

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> path_taps(const PathSpec& spec, std::size_t shift, std::mt19937_64& rng) {
  if (spec.taps) return *spec.taps;
  SyntheticPath p = spec.synthetic;
  if (p.delay + shift < p.length) p.delay += shift;
  return synthesize_path(p, rng);
}

// Sources on the plant's own primary path share input 0; a source with its
// own path gets a dedicated input.
struct InputMap {
  std::vector<std::size_t> input_of;  // per source
  std::vector<std::optional<std::size_t>> path_source;  // per input: source owning a custom path
};

InputMap input_map(const ExperimentConfig& cfg) {
  InputMap m;
  const bool shared = std::any_of(cfg.noise_sources.begin(), cfg.noise_sources.end(),
                                  [](const NoiseSourceSpec& s) { return !s.primary_path; });
  if (shared) m.path_source.push_back(std::nullopt);
  for (std::size_t s = 0; s < cfg.noise_sources.size(); ++s) {
    if (cfg.noise_sources[s].primary_path) {
      m.input_of.push_back(m.path_source.size());
      m.path_source.push_back(s);
    } else {
      m.input_of.push_back(0);
    }
  }
  return m;
}

std::vector<std::vector<FirFilter>> secondary_grid(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  std::vector<std::vector<FirFilter>> grid(cfg.plant.sources);
  for (std::size_t j = 0; j < cfg.plant.sources; ++j) {
    for (std::size_t k = 0; k < cfg.plant.mics; ++k) grid[j].emplace_back(path_taps(cfg.plant.secondary, 0, rng));
  }
  return grid;
}

// Paths are drawn in a fixed order: plant primary per mic, custom source
// paths per mic, then the secondary grid.
struct PathSet {
  std::vector<std::vector<double>> plant_primary;                 // per mic
  std::vector<std::vector<std::vector<double>>> source_primary;   // per source, per mic (custom only)
  std::vector<std::vector<FirFilter>> secondary;
};

PathSet draw_paths(const ExperimentConfig& cfg) {
  std::mt19937_64 rng(derive_seed(cfg.seed, stream::kPaths));
  PathSet ps;
  const std::size_t K = cfg.plant.mics;
  for (std::size_t k = 0; k < K; ++k) ps.plant_primary.push_back(path_taps(cfg.plant.primary, k, rng));
  ps.source_primary.resize(cfg.noise_sources.size());
  for (std::size_t s = 0; s < cfg.noise_sources.size(); ++s) {
    if (!cfg.noise_sources[s].primary_path) continue;
    for (std::size_t k = 0; k < K; ++k) ps.source_primary[s].push_back(path_taps(*cfg.noise_sources[s].primary_path, k, rng));
  }
  ps.secondary = secondary_grid(cfg, rng);
  return ps;
}

const std::vector<double>& source_path(const PathSet& ps, std::size_t source, std::size_t mic) {
  return ps.source_primary[source].empty() ? ps.plant_primary[mic] : ps.source_primary[source][mic];
}

ChannelConfig channel_config(const ExperimentConfig& cfg) {
  ChannelConfig c;
  c.references = cfg.controller.reference == ControllerSpec::Reference::PerSource ? cfg.noise_sources.size() : 1;
  c.sources = cfg.plant.sources;
  c.mics = cfg.plant.mics;
  c.taps = cfg.controller.taps;
  c.path_taps = cfg.sysid.taps;
  return c;
}

double mean_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double p = 0.0;
  for (double v : x) p += v * v;
  return p / static_cast<double>(x.size());
}

using References = std::vector<std::vector<double>>;

double auto_mu(const ExperimentConfig& cfg, const References& refs, const std::vector<std::vector<FirFilter>>& est) {
  if (cfg.controller.mu) return *cfg.controller.mu;
  const double taps = static_cast<double>(cfg.controller.taps);
  // Total filtered-reference power over every (i, j, k): the trace of the
  // coupled update. A max over loudspeakers diverged for J = 2.
  double total = 0.0;
  for (const auto& row : est) {
    for (const auto& x : refs) {
      for (const auto& f : row) {
        FirFilter g(f.weights());
        total += mean_power(g.process(std::span<const double>(x)));
      }
    }
  }
  if (!(total > 0.0)) return 0.0;
  // The multichannel update has no factor 2, hence twice the step.
  const double scale = cfg.controller.type == ControllerSpec::Type::Single ? 1.0 : 2.0;
  return scale * cfg.controller.mu_scale / (taps * total);
}

/// Single- or multichannel adaptive controller behind one interface.
class Adaptive {
 public:
  Adaptive(const ExperimentConfig& cfg, double mu, const std::vector<std::vector<FirFilter>>& est) {
    if (cfg.controller.type == ControllerSpec::Type::Single) {
      single_.emplace(cfg.controller.taps, mu, est[0][0]);
    } else {
      multi_.emplace(channel_config(cfg), mu, est);
    }
  }

  void filter(std::span<const double> x, std::span<double> u) {
    if (single_) {
      u[0] = single_->filter(x[0]);
    } else {
      multi_->filter(x, u);
    }
  }

  void adapt(std::span<const double> e) {
    if (single_) {
      single_->adapt(e[0]);
    } else {
      multi_->adapt(e);
    }
  }

  const std::vector<double>& weights() const { return single_ ? single_->weights() : multi_->weight_grid(); }

  WeightSet snapshot(const ExperimentConfig& cfg, const std::vector<std::vector<FirFilter>>& est) const {
    WeightSet w;
    if (single_) {
      w = WeightSet::single(single_->weights(), est[0][0].weights());
    } else {
      const auto c = channel_config(cfg);
      w.grid = true;
      w.references = static_cast<std::uint32_t>(c.references);
      w.sources = static_cast<std::uint32_t>(c.sources);
      w.mics = static_cast<std::uint32_t>(c.mics);
      w.taps = static_cast<std::uint32_t>(c.taps);
      w.path_taps = static_cast<std::uint32_t>(c.path_taps);
      w.weights = multi_->weight_grid();
      for (const auto& row : est) {
        for (const auto& f : row) w.sec_estimates.insert(w.sec_estimates.end(), f.weights().begin(), f.weights().end());
      }
    }
    return w;
  }

 private:
  std::optional<FxlmsController> single_;
  std::optional<McAncController> multi_;
};

std::vector<Signal> synthesize_sources(const ExperimentConfig& cfg, std::uint64_t base, double duration_s) {
  std::vector<Signal> out;
  for (std::size_t s = 0; s < cfg.noise_sources.size(); ++s) {
    out.push_back(
        synthesize_noise(cfg.noise_sources[s], cfg.sample_rate_hz, duration_s, derive_seed(cfg.seed, base + s)));
  }
  return out;
}

// Plant inputs for every sample, from the composed per-source components.
std::vector<std::vector<double>> plant_inputs(const ExperimentConfig& cfg, const Composition& comp) {
  const auto map = input_map(cfg);
  const std::size_t n = comp.reference.size();
  std::vector<std::vector<double>> in(map.path_source.size(), std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < comp.components.size(); ++s) {
    const auto& c = comp.components[s].samples();
    auto& dst = in[map.input_of[s]];
    for (std::size_t i = 0; i < n; ++i) dst[i] += c[i];
  }
  return in;
}

struct ArmSignals {
  std::vector<std::vector<double>> error;  // per mic
  std::vector<double> mse_trace;
  std::vector<std::vector<double>> snapshots;
  bool diverged = false;
  std::optional<std::size_t> divergence_index;
  std::string divergence_message;
};

enum class ArmKind { Uncontrolled, Adaptive, Fixed };

ArmSignals run_arm(ArmKind kind, const ExperimentConfig& cfg, const Plant& prototype,
                   const std::vector<std::vector<double>>& inputs, const References& refs, double mu,
                   const SecondaryEstimates& est, const WeightSet* fixed, WeightSet* final_weights) {
  Plant plant = prototype;
  plant.reset();
  const std::size_t n = refs[0].size();
  const std::size_t I = refs.size();
  const std::size_t K = plant.mics();
  const std::size_t J = plant.sources();
  const std::size_t dec = cfg.metrics.trace_decimation;
  ArmSignals out;
  out.error.assign(K, std::vector<double>(n, 0.0));

  std::optional<Adaptive> ctrl;
  std::vector<FirFilter> frozen;
  if (kind == ArmKind::Adaptive) ctrl.emplace(cfg, mu, est.estimates);
  if (kind == ArmKind::Fixed) {
    for (std::size_t ij = 0; ij < I * J; ++ij) {
      const auto first = fixed->weights.begin() + static_cast<std::ptrdiff_t>(ij * fixed->taps);
      frozen.emplace_back(std::vector<double>(first, first + fixed->taps));
    }
  }

  std::vector<double> x(inputs.size()), r(I), u(J, 0.0), e(K, 0.0);
  double block = 0.0;
  std::size_t i = 0;
  try {
    for (; i < n; ++i) {
      for (std::size_t q = 0; q < inputs.size(); ++q) x[q] = inputs[q][i];
      for (std::size_t q = 0; q < I; ++q) r[q] = refs[q][i];
      if (ctrl) {
        ctrl->filter(r, u);
      } else if (kind == ArmKind::Fixed) {
        std::fill(u.begin(), u.end(), 0.0);
        for (std::size_t q = 0; q < I; ++q) {
          for (std::size_t j = 0; j < J; ++j) u[j] += frozen[q * J + j].process(r[q]);
        }
      }
      plant.step(x, u, e);
      for (std::size_t k = 0; k < K; ++k) out.error[k][i] = e[k];
      if (ctrl) {
        ctrl->adapt(e);
        for (double v : e) block += v * v;
        if ((i + 1) % dec == 0) {
          out.mse_trace.push_back(block / static_cast<double>(dec));
          out.snapshots.push_back(ctrl->weights());
          block = 0.0;
        }
      }
    }
  } catch (const DivergenceError& ex) {
    out.diverged = true;
    out.divergence_index = i;
    out.divergence_message = ex.what();
    // the diverging sample's error stays; nothing after it
    for (auto& mic : out.error) mic.resize(std::min(n, i + 1));
  }
  if (ctrl && final_weights) *final_weights = ctrl->snapshot(cfg, est.estimates);
  return out;
}

ArmReport make_report(const std::string& name, const ExperimentConfig& cfg, const std::vector<Signal>& disturbance,
                      ArmSignals&& sig) {
  const double fs = cfg.sample_rate_hz;
  ArmReport r;
  r.name = name;
  const std::size_t len = sig.error.empty() ? 0 : sig.error[0].size();
  for (const auto& d : disturbance) r.disturbance.push_back(d.slice(0, len));
  for (auto& e : sig.error) r.error.emplace_back(std::move(e), fs);
  r.diverged = sig.diverged;
  r.divergence_index = sig.divergence_index;
  r.divergence_message = std::move(sig.divergence_message);
  r.mse_trace = std::move(sig.mse_trace);

  r.nr_per_interval = noise_reduction_per_interval(r.disturbance, r.error, cfg.metrics.interval_s);
  const auto per = static_cast<std::size_t>(std::llround(cfg.metrics.interval_s * fs));
  for (std::size_t q = 0; per > 0 && (q + 1) * per <= len; ++q) {
    double pd = 0.0, pe = 0.0;
    for (std::size_t k = 0; k < r.error.size(); ++k) {
      for (std::size_t i = q * per; i < (q + 1) * per; ++i) {
        pd += r.disturbance[k][i] * r.disturbance[k][i];
        pe += r.error[k][i] * r.error[k][i];
      }
    }
    r.interval_disturbance_power.push_back(pd / static_cast<double>(per));
    r.interval_error_power.push_back(pe / static_cast<double>(per));
  }
  r.snr = snr_overall(r.disturbance, r.error);
  for (std::size_t k = 0; k < r.error.size(); ++k) {
    r.disturbance_power += r.disturbance[k].power();
    r.error_power += r.error[k].power();
  }
  if (!r.error.empty() && r.error[0].size() >= cfg.metrics.psd_segment) {
    r.psd = power_spectrum(r.error[0], cfg.metrics.psd_segment, cfg.metrics.psd_overlap);
  }
  if (!r.error.empty() && r.error[0].size() >= cfg.metrics.stft_frame) {
    r.spectrogram = spectrogram(r.error[0], cfg.metrics.stft_frame, cfg.metrics.stft_hop);
  }
  return r;
}

void check_fixed_shape(const ExperimentConfig& cfg, const WeightSet& w) {
  w.validate();
  const auto c = channel_config(cfg);
  if (w.references != c.references || w.sources != c.sources || w.taps != c.taps) {
    throw Error(ErrorKind::Config, "fixed filter weights do not match the controller geometry (I=" +
                                       std::to_string(c.references) + ", J=" + std::to_string(c.sources) +
                                       ", taps=" + std::to_string(c.taps) + ")");
  }
}

}  // namespace

ScenarioSignals synthesize_scenario(const ExperimentConfig& cfg) {
  ScenarioSignals out;
  out.sources = synthesize_sources(cfg, stream::kSource, cfg.duration_s);
  out.composition = compose_components(out.sources, cfg.composition, cfg.total_samples());
  return out;
}

Plant build_plant(const ExperimentConfig& cfg) {
  const auto ps = draw_paths(cfg);
  const auto map = input_map(cfg);
  std::vector<std::vector<FirFilter>> primary;
  for (const auto& owner : map.path_source) {
    std::vector<FirFilter> row;
    for (std::size_t k = 0; k < cfg.plant.mics; ++k) {
      row.emplace_back(owner ? ps.source_primary[*owner][k] : ps.plant_primary[k]);
    }
    primary.push_back(std::move(row));
  }
  return Plant(std::move(primary), ps.secondary, cfg.plant.measurement_noise_std,
               derive_seed(cfg.seed, stream::kEvalNoise));
}

SecondaryEstimates estimate_secondary_paths(const ExperimentConfig& cfg, const Plant& plant) {
  SecondaryEstimates out;
  const std::size_t M = cfg.sysid.taps;
  std::mt19937_64 mismatch(derive_seed(cfg.seed, stream::kMismatch));
  out.estimates.resize(plant.sources());
  for (std::size_t j = 0; j < plant.sources(); ++j) {
    for (std::size_t k = 0; k < plant.mics(); ++k) {
      const auto& truth = plant.secondary_path(j, k).weights();
      SysidReport rep;
      rep.source = j;
      rep.mic = k;
      rep.undermodeled = truncated_tail_fraction(truth, M) > 0.01;
      std::vector<double> est;
      if (cfg.sysid.mode == SysidSpec::Mode::Exact) {
        est = truth;
        est.resize(M, 0.0);
      } else {
        IdentificationOptions opts;
        opts.taps = M;
        opts.mu = cfg.sysid.mu;
        opts.samples = cfg.sysid.samples;
        opts.seed = derive_seed(cfg.seed, stream::kSysid + j * plant.mics() + k);
        est = identify_path(plant, j, k, opts).estimate.weights();
      }
      FirFilter f = perturb_estimate(FirFilter(std::move(est)), cfg.sysid.mismatch, mismatch);
      rep.misalignment_db = misalignment_db(truth, f.weights());
      out.estimates[j].push_back(std::move(f));
      out.reports.push_back(rep);
    }
  }
  return out;
}

PretrainOutcome pretrain_fixed_filter(const ExperimentConfig& cfg, const Plant& plant,
                                      const SecondaryEstimates& estimates) {
  const std::size_t src = cfg.fixed.train_source;
  const double fs = cfg.sample_rate_hz;
  const Signal train = synthesize_noise(cfg.noise_sources[src], fs, cfg.fixed.max_duration_s,
                                        derive_seed(cfg.seed, stream::kTrainSource + src));
  // One input through the training source's own path, same loudspeakers.
  const auto ps = draw_paths(cfg);
  std::vector<FirFilter> row;
  for (std::size_t k = 0; k < plant.mics(); ++k) row.emplace_back(source_path(ps, src, k));
  std::vector<std::vector<FirFilter>> secondary(plant.sources());
  for (std::size_t j = 0; j < plant.sources(); ++j) {
    for (std::size_t k = 0; k < plant.mics(); ++k) secondary[j].push_back(plant.secondary_path(j, k));
  }
  const std::uint64_t noise_seed = derive_seed(cfg.seed, stream::kTrainNoise);
  Plant controlled({row}, secondary, cfg.plant.measurement_noise_std, noise_seed);
  Plant open({row}, secondary, cfg.plant.measurement_noise_std, noise_seed);
  controlled.reset();
  open.reset();

  // Only the training source's reference is live; with per-source
  // references the other channels see silence and keep zero weights.
  const auto ch = channel_config(cfg);
  const std::size_t slot = ch.references > 1 ? src : 0;
  References refs(ch.references, std::vector<double>(train.size(), 0.0));
  refs[slot] = train.samples();

  PretrainOutcome out;
  out.report.mu = auto_mu(cfg, refs, estimates.estimates);
  Adaptive ctrl(cfg, out.report.mu, estimates.estimates);

  const std::size_t J = plant.sources(), K = plant.mics();
  const auto per = static_cast<std::size_t>(std::llround(cfg.metrics.interval_s * fs));
  const auto min_n = static_cast<std::size_t>(std::llround(cfg.fixed.min_duration_s * fs));
  std::vector<double> r(ch.references, 0.0), u(J, 0.0), e(K, 0.0), d(K, 0.0), zero(J, 0.0);
  double pd = 0.0, pe = 0.0;
  std::optional<double> prev_nr;
  std::size_t n = 0;
  for (; n < train.size(); ++n) {
    const double x = train[n];
    r[slot] = x;
    ctrl.filter(r, u);
    controlled.step(std::span<const double>(&x, 1), u, e);
    open.step(std::span<const double>(&x, 1), zero, d);
    try {
      ctrl.adapt(e);
    } catch (const DivergenceError& ex) {
      throw DivergenceError(std::string("pre-training: ") + ex.what(), ex.sample_index());
    }
    for (std::size_t k = 0; k < K; ++k) {
      pd += d[k] * d[k];
      pe += e[k] * e[k];
    }
    if (per > 0 && (n + 1) % per == 0) {
      const Level nr = Level::from_powers(pd, pe);
      out.report.nr_per_interval.push_back(nr);
      pd = pe = 0.0;
      if (n + 1 >= min_n && nr.finite() && prev_nr && nr.db - *prev_nr < cfg.fixed.min_improvement_db) {
        out.report.converged = true;
        ++n;
        break;
      }
      prev_nr = nr.finite() ? std::optional<double>(nr.db) : std::nullopt;
    }
  }
  out.report.samples = n;
  out.weights = ctrl.snapshot(cfg, estimates.estimates);
  return out;
}

ScenarioResult run_scenario(const ExperimentConfig& cfg, const ScenarioOptions& options) {
  ScenarioResult res;
  res.provenance = {config_hash(cfg), cfg.seed, version_string()};
  res.sample_rate_hz = cfg.sample_rate_hz;
  res.interval_s = cfg.metrics.interval_s;

  const Plant plant = build_plant(cfg);
  const SecondaryEstimates est = estimate_secondary_paths(cfg, plant);
  res.sysid = est.reports;
  for (const auto& r : est.reports) {
    if (r.undermodeled) {
      res.warnings.push_back("secondary path (" + std::to_string(r.source) + ", " + std::to_string(r.mic) +
                             ") keeps more than 1% of its energy beyond " + std::to_string(cfg.sysid.taps) +
                             " estimate taps");
    }
  }

  ArmSignals pretrain_failure;
  if (options.fixed_weights) {
    check_fixed_shape(cfg, *options.fixed_weights);
    res.fixed_weights = *options.fixed_weights;
  } else {
    try {
      auto pre = pretrain_fixed_filter(cfg, plant, est);
      res.fixed_weights = std::move(pre.weights);
      res.pretrain = std::move(pre.report);
      if (!res.pretrain.converged) res.warnings.push_back("fixed-filter pre-training stopped at max_duration_s");
    } catch (const DivergenceError& ex) {
      // no weights to freeze; the fixed arm is reported diverged and left empty
      pretrain_failure.diverged = true;
      pretrain_failure.divergence_index = ex.sample_index();
      pretrain_failure.divergence_message = ex.what();
      pretrain_failure.error.assign(cfg.plant.mics, {});
      res.pretrain.samples = ex.sample_index() + 1;
    }
  }

  const auto signals = synthesize_scenario(cfg);
  const Composition& comp = signals.composition;
  const auto inputs = plant_inputs(cfg, comp);
  References refs;
  if (channel_config(cfg).references > 1) {
    for (const auto& c : comp.components) refs.push_back(c.samples());
  } else {
    refs.push_back(comp.reference.samples());
  }
  res.mu = auto_mu(cfg, refs, est.estimates);

  ArmSignals open = run_arm(ArmKind::Uncontrolled, cfg, plant, inputs, refs, 0.0, est, nullptr, nullptr);
  std::vector<Signal> disturbance;
  for (const auto& mic : open.error) disturbance.emplace_back(mic, cfg.sample_rate_hz);

  ArmSignals adaptive, fixed;
  const auto do_adaptive = [&] {
    adaptive = run_arm(ArmKind::Adaptive, cfg, plant, inputs, refs, res.mu, est, nullptr,
                       &res.adaptive_weights);
  };
  const auto do_fixed = [&] {
    if (pretrain_failure.diverged) {
      fixed = std::move(pretrain_failure);
      return;
    }
    fixed = run_arm(ArmKind::Fixed, cfg, plant, inputs, refs, 0.0, est, &res.fixed_weights, nullptr);
  };
  if (options.parallel_arms) {
    std::thread t(do_fixed);
    do_adaptive();
    t.join();
  } else {
    do_adaptive();
    do_fixed();
  }

  // Convergence trace; with no known optimum, deviation is taken from the final weights.
  res.adaptive_trace.decimation = cfg.metrics.trace_decimation;
  res.adaptive_trace.mse = adaptive.mse_trace;
  const auto& wf = res.adaptive_weights.weights;
  for (const auto& snap : adaptive.snapshots) {
    double s = 0.0;
    for (std::size_t q = 0; q < snap.size() && q < wf.size(); ++q) s += (snap[q] - wf[q]) * (snap[q] - wf[q]);
    res.adaptive_trace.msd.push_back(s);
  }
  adaptive.snapshots.clear();

  res.arms.push_back(make_report("uncontrolled", cfg, disturbance, std::move(open)));
  res.arms.push_back(make_report("adaptive", cfg, disturbance, std::move(adaptive)));
  res.arms.push_back(make_report("fixed", cfg, disturbance, std::move(fixed)));
  return res;
}

bool ScenarioResult::any_diverged() const noexcept {
  return std::any_of(arms.begin(), arms.end(), [](const ArmReport& a) { return a.diverged; });
}

const ArmReport* ScenarioResult::arm(const std::string& name) const noexcept {
  for (const auto& a : arms) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

}  // namespace anc
