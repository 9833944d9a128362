#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace anc::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

struct PlanGuard {
  fftw_plan plan = nullptr;
  PlanGuard() = default;
  explicit PlanGuard(fftw_plan p) : plan(p) {}
  PlanGuard(const PlanGuard&) = delete;
  PlanGuard& operator=(const PlanGuard&) = delete;
  ~PlanGuard() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

struct RealFft::Impl {
  std::unique_ptr<double, FftwFree> in;
  std::unique_ptr<fftw_complex, FftwFree> out;
  PlanGuard plan;
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  impl_->in.reset(fftw_alloc_real(n));
  impl_->out.reset(fftw_alloc_complex(n / 2 + 1));
  std::lock_guard lock(planner_mutex());
  impl_->plan.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), impl_->in.get(), impl_->out.get(), FFTW_ESTIMATE);
}

RealFft::~RealFft() = default;

void RealFft::power(std::span<const double> x, std::span<double> out) {
  std::copy(x.begin(), x.end(), impl_->in.get());
  fftw_execute(impl_->plan.plan);
  const fftw_complex* spec = impl_->out.get();
  for (std::size_t k = 0; k <= n_ / 2; ++k) out[k] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(len);
  const std::size_t bins = n / 2 + 1;
  std::unique_ptr<double, FftwFree> ra(fftw_alloc_real(n)), rb(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> ca(fftw_alloc_complex(bins)), cb(fftw_alloc_complex(bins));
  PlanGuard fa, fb, inv;
  {
    std::lock_guard lock(planner_mutex());
    fa.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), ra.get(), ca.get(), FFTW_ESTIMATE);
    fb.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), rb.get(), cb.get(), FFTW_ESTIMATE);
    inv.plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), ca.get(), ra.get(), FFTW_ESTIMATE);
  }
  std::fill(ra.get(), ra.get() + n, 0.0);
  std::fill(rb.get(), rb.get() + n, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());
  fftw_execute(fa.plan);
  fftw_execute(fb.plan);
  fftw_complex* x = ca.get();
  const fftw_complex* y = cb.get();
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = x[k][0] * y[k][0] - x[k][1] * y[k][1];
    const double im = x[k][0] * y[k][1] + x[k][1] * y[k][0];
    x[k][0] = re;
    x[k][1] = im;
  }
  fftw_execute(inv.plan);
  std::vector<double> out(ra.get(), ra.get() + len);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace anc::detail
