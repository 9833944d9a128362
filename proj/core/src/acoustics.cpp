#include "anc/acoustics.hpp"

#include <cmath>
#include <string>

#include "anc/error.hpp"

namespace anc {
namespace {

void require_medium(const MediumParams& medium) {
  if (!(medium.rho > 0.0) || !(medium.c > 0.0)) {
    throw Error(ErrorKind::Domain, "medium density and sound speed must be positive");
  }
}

}  // namespace

double energy_density(double amplitude, const MediumParams& medium) {
  require_medium(medium);
  if (!(amplitude >= 0.0)) throw Error(ErrorKind::Domain, "pressure amplitude must be non-negative");
  return amplitude * amplitude / (4.0 * medium.rho * medium.c * medium.c);
}

double superposed_energy_density(const WaveParams& wave, const MediumParams& medium) {
  if (!(wave.beta >= 0.0)) throw Error(ErrorKind::Domain, "amplitude ratio must be non-negative");
  return energy_density(wave.amplitude, medium) *
         (1.0 + 2.0 * wave.beta * std::cos(wave.alpha) + wave.beta * wave.beta);
}

SplDelta spl_delta(double beta, double alpha) {
  if (!(beta >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::Domain, "spl_delta needs beta >= 0 and a finite phase");
  }
  const double ratio = 1.0 + 2.0 * beta * std::cos(alpha) + beta * beta;
  if (ratio <= 0.0) return SplDelta{0.0, true};
  return SplDelta{-10.0 * std::log10(ratio), false};
}

SyntheticPath default_primary_path() { return SyntheticPath{8, 0.9, 0.6, 32, 0.0}; }

SyntheticPath default_secondary_path() { return SyntheticPath{4, 0.5, 0.5, 16, 0.1}; }

std::vector<double> synthesize_path(const SyntheticPath& spec, std::mt19937_64& rng) {
  if (spec.length == 0 || spec.delay >= spec.length) {
    throw Error(ErrorKind::Config, "synthetic path needs delay < length");
  }
  if (!(spec.perturbation >= 0.0 && spec.perturbation < 1.0)) {
    throw Error(ErrorKind::Config, "path perturbation must lie in [0, 1)");
  }
  std::vector<double> taps(spec.length, 0.0);
  double value = spec.gain;
  for (std::size_t k = spec.delay; k < spec.length; ++k) {
    taps[k] = value;
    value *= spec.decay;
  }
  if (spec.perturbation > 0.0) {
    std::uniform_real_distribution<double> jitter(-spec.perturbation, spec.perturbation);
    for (std::size_t k = spec.delay; k < spec.length; ++k) taps[k] *= 1.0 + jitter(rng);
  }
  return taps;
}

Plant::Plant(std::vector<std::vector<FirFilter>> primary, std::vector<std::vector<FirFilter>> secondary,
             double measurement_noise_std, std::uint64_t noise_seed)
    : primary_(std::move(primary)),
      secondary_(std::move(secondary)),
      noise_std_(measurement_noise_std),
      noise_seed_(noise_seed),
      rng_(noise_seed) {
  if (primary_.empty() || secondary_.empty()) {
    throw Error(ErrorKind::Dimension, "plant needs at least one primary input and one secondary source");
  }
  mics_ = primary_.front().size();
  if (mics_ == 0) throw Error(ErrorKind::Dimension, "plant needs at least one microphone");
  for (const auto& row : primary_) {
    if (row.size() != mics_) throw Error(ErrorKind::Dimension, "primary path grid is not rectangular");
  }
  for (const auto& row : secondary_) {
    if (row.size() != mics_) throw Error(ErrorKind::Dimension, "secondary path grid does not match microphone count");
  }
  if (!(noise_std_ >= 0.0) || !std::isfinite(noise_std_)) {
    throw Error(ErrorKind::Domain, "measurement noise std must be finite and non-negative");
  }
}

Plant Plant::siso(std::vector<double> primary, std::vector<double> secondary, double measurement_noise_std,
                  std::uint64_t noise_seed) {
  std::vector<std::vector<FirFilter>> p{{FirFilter(std::move(primary))}};
  std::vector<std::vector<FirFilter>> s{{FirFilter(std::move(secondary))}};
  return Plant(std::move(p), std::move(s), measurement_noise_std, noise_seed);
}

void Plant::step(std::span<const double> x, std::span<const double> u, std::span<double> e) {
  if (x.size() != primary_.size() || u.size() != secondary_.size() || e.size() != mics_) {
    throw Error(ErrorKind::Dimension, "plant step expects " + std::to_string(primary_.size()) + " inputs, " +
                                          std::to_string(secondary_.size()) + " loudspeaker signals and " +
                                          std::to_string(mics_) + " microphones");
  }
  for (double v : u) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Data, "non-finite loudspeaker signal");
  }
  for (std::size_t k = 0; k < mics_; ++k) e[k] = 0.0;
  for (std::size_t i = 0; i < primary_.size(); ++i) {
    for (std::size_t k = 0; k < mics_; ++k) e[k] += primary_[i][k].process(x[i]);
  }
  for (std::size_t j = 0; j < secondary_.size(); ++j) {
    for (std::size_t k = 0; k < mics_; ++k) e[k] += secondary_[j][k].process(u[j]);
  }
  if (noise_std_ > 0.0) {
    for (std::size_t k = 0; k < mics_; ++k) e[k] += noise_std_ * gauss_(rng_);
  }
}

std::vector<double> Plant::step(std::span<const double> x, std::span<const double> u) {
  std::vector<double> e(mics_);
  step(x, u, e);
  return e;
}

std::vector<double> Plant::step(double x, std::span<const double> u) {
  const double xs[1] = {x};
  return step(std::span<const double>(xs, 1), u);
}

void Plant::reset() {
  for (auto& row : primary_) {
    for (auto& f : row) f.reset();
  }
  for (auto& row : secondary_) {
    for (auto& f : row) f.reset();
  }
  rng_.seed(noise_seed_);
  gauss_.reset();
}

}  // namespace anc
