#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace anc::detail {

/// Real-to-complex FFT of a fixed length backed by FFTW. Plan creation is
/// serialized internally, so instances may be built on any thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }

  /// |X_k|^2 for k = 0..n/2.
  void power(std::span<const double> x, std::span<double> out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

/// Linear convolution computed through one zero-padded FFT product; the
/// result has a.size() + b.size() - 1 samples.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

}  // namespace anc::detail
