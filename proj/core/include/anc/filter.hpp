#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "anc/signal.hpp"

namespace anc {

/// Transversal FIR filter with an explicit delay line.
///
/// The delay line holds the most recent N inputs (newest first) and starts
/// zeroed, so output[n] = sum_i w[i] * x[n - i] with x[k] = 0 for k < 0.
/// Streaming a signal in blocks gives bit-identical results to one call on
/// the whole signal.
class FirFilter {
 public:
  explicit FirFilter(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  void set_weights(std::vector<double> weights);

  /// Pushes one input sample and returns the output for that instant.
  double process(double x);
  Signal process(const Signal& x);
  std::vector<double> process(std::span<const double> x);

  /// Output for the current delay-line contents without advancing.
  double output() const noexcept;

  /// Delay-line contents, newest sample first.
  std::span<const double> history() const noexcept { return history_; }

  void reset() noexcept;

 private:
  void push(double x) noexcept;

  std::vector<double> weights_;
  std::vector<double> history_;
};

/// Direct-form I recursive filter:
/// y[n] = sum_{i<M} a[i] x[n-i] + sum_{i>=1} b[i] y[n-i].
/// `feedback` holds b[1], b[2], ...; stability is not guaranteed.
class IirFilter {
 public:
  IirFilter(std::vector<double> feedforward, std::vector<double> feedback);

  const std::vector<double>& feedforward() const noexcept { return a_; }
  const std::vector<double>& feedback() const noexcept { return b_; }

  /// Throws InstabilityError once |y| exceeds kSampleGuard or turns non-finite.
  double process(double x);
  Signal process(const Signal& x);

  /// True iff every root of 1 - sum b[i] z^-i lies strictly inside the unit circle.
  bool is_stable() const;

  void reset() noexcept;

 private:
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> x_hist_;
  std::vector<double> y_hist_;
  std::size_t processed_ = 0;
};

/// H(e^{jw}) of the current weight snapshot, w = 2*pi*freq_hz/sample_rate_hz.
std::complex<double> frequency_response(const FirFilter& filter, double freq_hz, double sample_rate_hz);

/// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace anc
