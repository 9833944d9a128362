#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "anc/acoustics.hpp"
#include "anc/filter.hpp"
#include "anc/signal.hpp"

namespace anc {

struct IdentificationOptions {
  std::size_t taps = 64;       // M
  double mu = 0.01;
  std::size_t samples = 50000;
  std::uint64_t seed = 1;
};

struct IdentificationResult {
  FirFilter estimate{std::vector<double>{0.0}};
  /// 10 log10(|s - s_hat|^2 / |s|^2); empty when the true path is all zero.
  std::optional<double> misalignment_db;
  /// Mean squared a-priori error over the final 10% of the run.
  double residual_power = 0.0;
  /// Set when the true path's energy beyond `taps` exceeds 1% of its total.
  bool undermodeled = false;
  /// Misalignment at 10, 100, 1000, ... samples, while within the run.
  std::vector<std::pair<std::size_t, double>> checkpoints;
  std::vector<double> excitation;
  std::vector<double> response;
};

/// Offline identification of the (source j -> mic k) secondary path.
///
/// A clone of the plant is reset and its primary inputs muted; loudspeaker j
/// is driven with seeded unit-power white noise (others silent) and an LMS
/// filter of length `taps` adapts against microphone k.
IdentificationResult identify_path(const Plant& plant, std::size_t source, std::size_t mic,
                                   const IdentificationOptions& options);

/// 10 log10(|truth - estimate|^2 / |truth|^2) with zero padding to the longer length.
std::optional<double> misalignment_db(const std::vector<double>& truth, const std::vector<double>& estimate);

/// Fraction of the truth's energy that lies at or beyond tap `taps`.
double truncated_tail_fraction(const std::vector<double>& truth, std::size_t taps);

/// Tap-wise multiplicative mismatch: s_hat[m] *= 1 + U(-fraction, fraction).
FirFilter perturb_estimate(const FirFilter& estimate, double fraction, std::mt19937_64& rng);

}  // namespace anc
