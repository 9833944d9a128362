#include "anc/sysid.hpp"

#include <cmath>
#include <algorithm>
#include <string>

#include "anc/adaptation.hpp"
#include "anc/error.hpp"

namespace anc {

std::optional<double> misalignment_db(const std::vector<double>& truth, const std::vector<double>& estimate) {
  const std::size_t n = std::max(truth.size(), estimate.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i < truth.size() ? truth[i] : 0.0;
    const double s = i < estimate.size() ? estimate[i] : 0.0;
    num += (t - s) * (t - s);
    den += t * t;
  }
  if (!(den > 0.0)) return std::nullopt;
  // Exact recovery is reported at -300 dB rather than -inf.
  return 10.0 * std::log10(std::max(num / den, 1e-30));
}

double truncated_tail_fraction(const std::vector<double>& truth, std::size_t taps) {
  double total = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    total += truth[i] * truth[i];
    if (i >= taps) tail += truth[i] * truth[i];
  }
  return total > 0.0 ? tail / total : 0.0;
}

FirFilter perturb_estimate(const FirFilter& estimate, double fraction, std::mt19937_64& rng) {
  if (!(fraction >= 0.0)) throw Error(ErrorKind::Domain, "mismatch fraction must be non-negative");
  std::vector<double> taps = estimate.weights();
  if (fraction > 0.0) {
    std::uniform_real_distribution<double> jitter(-fraction, fraction);
    for (double& t : taps) t *= 1.0 + jitter(rng);
  }
  return FirFilter(std::move(taps));
}

IdentificationResult identify_path(const Plant& plant, std::size_t source, std::size_t mic,
                                   const IdentificationOptions& options) {
  if (source >= plant.sources() || mic >= plant.mics()) {
    throw Error(ErrorKind::Dimension, "secondary path (" + std::to_string(source) + ", " + std::to_string(mic) +
                                          ") outside the plant grid");
  }
  if (options.taps == 0 || options.samples == 0) {
    throw Error(ErrorKind::Domain, "identification needs at least one tap and one sample");
  }
  Plant quiet = plant;
  quiet.reset();
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::vector<double> truth = plant.secondary_path(source, mic).weights();
  LmsFilter lms(options.taps, options.mu);
  const std::vector<double> x_muted(quiet.inputs(), 0.0);
  std::vector<double> u(quiet.sources(), 0.0);
  std::vector<double> e(quiet.mics(), 0.0);

  IdentificationResult result;
  result.excitation.reserve(options.samples);
  result.response.reserve(options.samples);
  const std::size_t tail_start = options.samples - options.samples / 10;
  double residual = 0.0;
  std::size_t next_checkpoint = 10;
  for (std::size_t n = 0; n < options.samples; ++n) {
    const double v = gauss(rng);
    u[source] = v;
    quiet.step(x_muted, u, e);
    const LmsOutput out = lms.step(v, e[mic]);
    if (n >= tail_start) residual += out.e * out.e;
    result.excitation.push_back(v);
    result.response.push_back(e[mic]);
    if (n + 1 == next_checkpoint) {
      if (auto mis = misalignment_db(truth, lms.weights())) result.checkpoints.emplace_back(n + 1, *mis);
      next_checkpoint *= 10;
    }
  }
  result.residual_power = residual / static_cast<double>(options.samples - tail_start);
  result.estimate = FirFilter(lms.weights());
  result.misalignment_db = misalignment_db(truth, lms.weights());
  result.undermodeled = truncated_tail_fraction(truth, options.taps) > 0.01;
  return result;
}

}  // namespace anc
