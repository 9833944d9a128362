#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace anc {

/// Uniformly sampled real-valued sequence. Samples are validated finite on
/// construction and the sample rate must be positive.
class Signal {
 public:
  Signal() = default;
  Signal(std::vector<double> samples, double sample_rate_hz);

  static Signal zeros(std::size_t length, double sample_rate_hz);

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::span<const double> view() const noexcept { return samples_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }
  double duration_s() const noexcept;

  /// Mean of the squared samples; zero for an empty signal.
  double power() const noexcept;

  /// Samples [begin, begin + count), clipped to the signal length.
  Signal slice(std::size_t begin, std::size_t count) const;

  /// Returns a copy with every sample multiplied by `gain`.
  Signal scaled(double gain) const;

  std::vector<double> release() && { return std::move(samples_); }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::vector<double> samples_;
  double sample_rate_hz_ = 1.0;
};

/// Throws a Data error unless every signal shares the same sample rate.
void require_same_rate(std::span<const Signal> signals);

}  // namespace anc
