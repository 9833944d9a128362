#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "anc/filter.hpp"

namespace anc {

/// Geometry of a multichannel controller: I reference sensors, J secondary
/// sources, K error microphones, control filters of length L and secondary
/// path estimates of length M.
struct ChannelConfig {
  std::size_t references = 1;  // I
  std::size_t sources = 1;     // J
  std::size_t mics = 1;        // K
  std::size_t taps = 1;        // L
  std::size_t path_taps = 1;   // M

  void validate() const;
  friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
};

/// Per-sample multiply-accumulate counts of the three computational steps.
struct MacBreakdown {
  std::uint64_t control_output = 0;      // IJL
  std::uint64_t filtered_reference = 0;  // IJKM
  std::uint64_t weight_update = 0;       // IJKL + K
  std::uint64_t total() const noexcept { return control_output + filtered_reference + weight_update; }
};

/// (IJK + IJ) L + IJKM + K, with its per-step breakdown.
MacBreakdown mac_count(const ChannelConfig& cfg);

/// 2 L N^3 + L N^2 + N for the square system N = I = J = K, L = M.
std::uint64_t mac_count_standard(std::uint64_t channels, std::uint64_t taps);

/// Multichannel filtered-x LMS controller.
///
/// filter(x, u) computes every y^(j)(n) and the I*J*K filtered references;
/// adapt(e) applies w^(i,j) -= mu * sum_k e^(k)(n) fx^(i,j,k)(n). Note the
/// update carries no factor 2: with I = J = K = 1 this controller at step
/// size 2*mu is bit-identical to FxlmsController at mu.
class McAncController {
 public:
  /// `sec_estimates` is J x K, each of length M.
  McAncController(ChannelConfig cfg, double mu, std::vector<std::vector<FirFilter>> sec_estimates);

  void filter(std::span<const double> x, std::span<double> u);
  std::vector<double> filter(std::span<const double> x);
  void adapt(std::span<const double> e);
  std::vector<double> step(std::span<const double> x, std::span<const double> e);

  const ChannelConfig& config() const noexcept { return cfg_; }
  double mu() const noexcept { return mu_; }
  void set_mu(double mu);

  std::span<const double> weights(std::size_t i, std::size_t j) const;
  void set_weights(std::size_t i, std::size_t j, std::span<const double> w);
  /// All weights, ordered (i, j, l) with l fastest.
  const std::vector<double>& weight_grid() const noexcept { return weights_; }
  const std::vector<std::vector<FirFilter>>& sec_estimates() const noexcept { return sec_estimates_; }
  std::span<const double> filtered_history(std::size_t i, std::size_t j, std::size_t k) const;

  /// Sum over microphones of e^(k)(n)^2 from the last adapt().
  double cost() const noexcept { return cost_; }
  std::size_t steps() const noexcept { return steps_; }

  void set_mac_counting(bool enabled) noexcept { count_macs_ = enabled; }
  std::uint64_t mac_operations() const noexcept { return macs_; }
  void reset_mac_counter() noexcept { macs_ = 0; }

 private:
  template <bool kCount>
  void filter_impl(std::span<const double> x, std::span<double> u);
  template <bool kCount>
  void adapt_impl(std::span<const double> e);

  std::size_t w_index(std::size_t i, std::size_t j) const noexcept { return (i * cfg_.sources + j) * cfg_.taps; }
  std::size_t fx_index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return ((i * cfg_.sources + j) * cfg_.mics + k) * cfg_.taps;
  }

  ChannelConfig cfg_;
  double mu_;
  std::vector<std::vector<FirFilter>> sec_estimates_;
  std::vector<double> weights_;      // I*J*L
  std::vector<double> x_history_;    // I delay lines of max(L, M), newest first
  std::vector<double> fx_history_;   // I*J*K delay lines of L, newest first
  std::vector<double> step_gain_;    // mu * e^(k)
  std::size_t history_len_;
  double cost_ = 0.0;
  std::size_t steps_ = 0;
  bool count_macs_ = false;
  std::uint64_t macs_ = 0;
};

struct MacMeasurement {
  std::uint64_t total = 0;
  std::uint64_t per_sample = 0;
  std::size_t samples = 0;
};

/// Runs the controller with MAC instrumentation on seeded synthetic data.
MacMeasurement mac_measure(const ChannelConfig& cfg, std::size_t n_samples, std::uint64_t seed = 1);

}  // namespace anc
