#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "anc/filter.hpp"
#include "anc/signal.hpp"

namespace anc {

// Sign conventions at this boundary:
//   LMS    e(n) = d(n) - y(n),          W += 2 mu e X
//   FxLMS  e(n) = d(n) + (s * u)(n),    W -= 2 mu e Xf
// The FxLMS error is what the plant's microphone reports, which adds the
// secondary contribution to the disturbance.

struct LmsOutput {
  double y = 0.0;
  double e = 0.0;
};

/// Least-mean-square adaptive transversal filter.
class LmsFilter {
 public:
  LmsFilter(std::size_t taps, double mu);
  LmsFilter(std::vector<double> initial_weights, double mu);

  /// Pushes x, filters, updates the weights with e = d - y.
  /// Throws DivergenceError if any weight leaves the guard.
  LmsOutput step(double x, double d);

  /// Instantaneous gradient -2 e(n) X(n) that step(x, d) would apply,
  /// evaluated without mutating the filter.
  std::vector<double> gradient(double x, double d) const;

  const std::vector<double>& weights() const noexcept { return filter_.weights(); }
  std::span<const double> history() const noexcept { return filter_.history(); }
  double mu() const noexcept { return mu_; }
  std::size_t steps() const noexcept { return steps_; }

 private:
  FirFilter filter_;
  double mu_;
  std::size_t steps_ = 0;
};

/// Single-channel filtered-x LMS controller.
///
/// One sample is two phases: filter(x) pushes x, returns the loudspeaker
/// output u(n) = W^T X(n) and pushes x_f(n) = (s_hat * x)(n); adapt(e)
/// then applies W -= 2 mu e(n) X_f(n) with the microphone sample e(n).
class FxlmsController {
 public:
  FxlmsController(std::size_t taps, double mu, FirFilter sec_path_estimate);
  FxlmsController(std::vector<double> initial_weights, double mu, FirFilter sec_path_estimate);

  double filter(double x);
  void adapt(double e);

  /// Fused filter(x) followed by adapt(e_measured).
  double step(double x, double e_measured);

  /// 2 e X_f(n) for the current filtered-reference history.
  std::vector<double> gradient(double e) const;

  const std::vector<double>& weights() const noexcept { return control_.weights(); }
  void set_weights(std::vector<double> weights);
  std::span<const double> history() const noexcept { return control_.history(); }
  std::span<const double> filtered_history() const noexcept { return xf_history_; }
  const FirFilter& sec_path_estimate() const noexcept { return sec_estimate_; }
  double mu() const noexcept { return mu_; }
  void set_mu(double mu);
  std::size_t taps() const noexcept { return control_.size(); }
  std::size_t steps() const noexcept { return steps_; }

 private:
  FirFilter control_;       // W(n) and X(n)
  FirFilter sec_estimate_;  // s_hat and its own reference delay line
  std::vector<double> xf_history_;  // X_f(n), newest first
  double mu_;
  std::size_t steps_ = 0;
};

/// Frozen snapshot of the controller weights: a fixed pre-trained filter.
FirFilter freeze(const FxlmsController& controller);

/// Sample estimate of the optimal weights R^-1 P over the whole record.
/// Throws Conditioning if cond(R) > 1e12, Domain if the record is shorter
/// than 10 N or the lengths differ.
std::vector<double> wiener_solve(std::span<const double> x, std::span<const double> d, std::size_t taps);
std::vector<double> wiener_solve(const Signal& x, const Signal& d, std::size_t taps);

/// 1 / (N * mean(x^2)).
double lms_mu_bound(std::span<const double> x, std::size_t taps);

/// 2 E{psi e} / E{psi^2 |X_f|^2}, with sample means over the traces.
double fxlms_mu_bound(std::span<const double> psi, std::span<const double> e,
                      std::span<const double> xf_norm_sq);
/// psi(n) = e(n).
double fxlms_mu_bound(std::span<const double> e, std::span<const double> xf_norm_sq);

struct ConvergenceTrace {
  std::vector<double> msd;  // |w_opt - W(n)|^2 per retained snapshot
  std::vector<double> mse;  // e^2(n) per retained snapshot
  std::size_t decimation = 1;
  std::optional<double> mu_bound;
};

/// Records W(n) and e(n) every `decimation` samples.
class WeightRecorder {
 public:
  explicit WeightRecorder(std::size_t decimation = 1);

  void record(std::span<const double> weights, double e);

  const std::vector<std::vector<double>>& snapshots() const noexcept { return snapshots_; }
  const std::vector<double>& errors() const noexcept { return errors_; }
  std::size_t decimation() const noexcept { return decimation_; }

 private:
  std::size_t decimation_;
  std::size_t counter_ = 0;
  std::vector<std::vector<double>> snapshots_;
  std::vector<double> errors_;
};

ConvergenceTrace convergence_trace(const WeightRecorder& recorder, std::span<const double> w_opt);
ConvergenceTrace convergence_trace(std::span<const std::vector<double>> snapshots,
                                   std::span<const double> errors, std::span<const double> w_opt,
                                   std::size_t decimation = 1);

}  // namespace anc
