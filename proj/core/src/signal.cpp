#include "anc/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "anc/error.hpp"

namespace anc {

Signal::Signal(std::vector<double> samples, double sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    throw Error(ErrorKind::Domain, "signal sample rate must be positive and finite");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw Error(ErrorKind::Data, "non-finite sample at index " + std::to_string(i));
    }
  }
}

Signal Signal::zeros(std::size_t length, double sample_rate_hz) {
  return Signal(std::vector<double>(length, 0.0), sample_rate_hz);
}

double Signal::duration_s() const noexcept {
  return static_cast<double>(samples_.size()) / sample_rate_hz_;
}

double Signal::power() const noexcept {
  if (samples_.empty()) return 0.0;
  double acc = 0.0;
  for (double v : samples_) acc += v * v;
  return acc / static_cast<double>(samples_.size());
}

Signal Signal::slice(std::size_t begin, std::size_t count) const {
  begin = std::min(begin, samples_.size());
  const std::size_t end = begin + std::min(count, samples_.size() - begin);
  return Signal(std::vector<double>(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                    samples_.begin() + static_cast<std::ptrdiff_t>(end)),
                sample_rate_hz_);
}

Signal Signal::scaled(double gain) const {
  std::vector<double> out(samples_);
  for (double& v : out) v *= gain;
  return Signal(std::move(out), sample_rate_hz_);
}

void require_same_rate(std::span<const Signal> signals) {
  for (const Signal& s : signals) {
    if (s.sample_rate_hz() != signals.front().sample_rate_hz()) {
      throw Error(ErrorKind::Data, "sample rate mismatch: " + std::to_string(s.sample_rate_hz()) + " Hz vs " +
                                       std::to_string(signals.front().sample_rate_hz()) + " Hz");
    }
  }
}

}  // namespace anc
