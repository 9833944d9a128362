#include "anc/filter.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "anc/error.hpp"

namespace anc {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Data, std::string(what) + " must be finite");
  }
}

void shift_in(std::vector<double>& line, double x) noexcept {
  if (line.empty()) return;
  std::copy_backward(line.begin(), line.end() - 1, line.end());
  line.front() = x;
}

}  // namespace

FirFilter::FirFilter(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error(ErrorKind::Domain, "FIR filter needs at least one tap");
  require_finite(weights_, "FIR weights");
  history_.assign(weights_.size(), 0.0);
}

void FirFilter::set_weights(std::vector<double> weights) {
  if (weights.size() != weights_.size()) {
    throw Error(ErrorKind::Dimension, "FIR weight count changed from " + std::to_string(weights_.size()) + " to " +
                                          std::to_string(weights.size()));
  }
  require_finite(weights, "FIR weights");
  weights_ = std::move(weights);
}

void FirFilter::push(double x) noexcept { shift_in(history_, x); }

double FirFilter::output() const noexcept { return dot(weights_, history_); }

double FirFilter::process(double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::Data, "non-finite FIR input sample");
  push(x);
  return output();
}

std::vector<double> FirFilter::process(std::span<const double> x) {
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (!std::isfinite(x[n])) throw Error(ErrorKind::Data, "non-finite FIR input at index " + std::to_string(n));
    push(x[n]);
    y[n] = output();
  }
  return y;
}

Signal FirFilter::process(const Signal& x) { return Signal(process(x.view()), x.sample_rate_hz()); }

void FirFilter::reset() noexcept { std::fill(history_.begin(), history_.end(), 0.0); }

IirFilter::IirFilter(std::vector<double> feedforward, std::vector<double> feedback)
    : a_(std::move(feedforward)), b_(std::move(feedback)) {
  if (a_.empty()) throw Error(ErrorKind::Domain, "IIR filter needs at least one feedforward coefficient");
  require_finite(a_, "IIR feedforward coefficients");
  require_finite(b_, "IIR feedback coefficients");
  x_hist_.assign(a_.size(), 0.0);
  y_hist_.assign(b_.size(), 0.0);
}

double IirFilter::process(double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::Data, "non-finite IIR input sample");
  shift_in(x_hist_, x);
  const double y = dot(a_, x_hist_) + dot(b_, y_hist_);
  const std::size_t index = processed_++;
  if (!std::isfinite(y) || std::abs(y) > kSampleGuard) {
    throw InstabilityError("IIR output left the finite-magnitude guard at sample " + std::to_string(index), index);
  }
  shift_in(y_hist_, y);
  return y;
}

Signal IirFilter::process(const Signal& x) {
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) y[n] = process(x[n]);
  return Signal(std::move(y), x.sample_rate_hz());
}

bool IirFilter::is_stable() const {
  // Trailing zero coefficients add poles at the origin only.
  std::size_t order = b_.size();
  while (order > 0 && b_[order - 1] == 0.0) --order;
  if (order == 0) return true;
  // Poles are the roots of z^P - b1 z^(P-1) - ... - bP: eigenvalues of the companion matrix.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(order), static_cast<Eigen::Index>(order));
  for (std::size_t i = 0; i < order; ++i) companion(0, static_cast<Eigen::Index>(i)) = b_[i];
  for (std::size_t i = 1; i < order; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  const auto& poles = solver.eigenvalues();
  for (Eigen::Index i = 0; i < poles.size(); ++i) {
    if (std::abs(poles[i]) >= 1.0) return false;
  }
  return true;
}

void IirFilter::reset() noexcept {
  std::fill(x_hist_.begin(), x_hist_.end(), 0.0);
  std::fill(y_hist_.begin(), y_hist_.end(), 0.0);
  processed_ = 0;
}

std::complex<double> frequency_response(const FirFilter& filter, double freq_hz, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorKind::Domain, "sample rate must be positive");
  if (!(freq_hz >= 0.0 && freq_hz <= sample_rate_hz / 2.0)) {
    throw Error(ErrorKind::Domain, "frequency " + std::to_string(freq_hz) + " Hz outside [0, Nyquist]");
  }
  const double omega = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  std::complex<double> h{0.0, 0.0};
  const auto& w = filter.weights();
  for (std::size_t i = 0; i < w.size(); ++i) {
    h += w[i] * std::polar(1.0, -omega * static_cast<double>(i));
  }
  return h;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  const std::size_t n = std::min(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace anc
