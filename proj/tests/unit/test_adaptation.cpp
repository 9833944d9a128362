#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "anc/acoustics.hpp"
#include "anc/adaptation.hpp"
#include "anc/error.hpp"

using namespace anc;

namespace {

std::vector<double> randn(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<double> fir(const std::vector<double>& w, const std::vector<double>& x) {
  FirFilter f(w);
  return f.process(std::span<const double>(x));
}

double norm(const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

}  // namespace

TEST(Lms, ZeroStepFreezesWeights) {
  LmsFilter f({0.3, -0.2}, 0.0);
  const auto x = randn(200, 1), d = randn(200, 2);
  FirFilter ref({0.3, -0.2});
  for (std::size_t n = 0; n < x.size(); ++n) {
    const auto out = f.step(x[n], d[n]);
    EXPECT_EQ(out.e, d[n] - ref.process(x[n]));
  }
  EXPECT_EQ(f.weights(), (std::vector<double>{0.3, -0.2}));
}

TEST(Lms, SingleSubstitution) {
  LmsFilter f(1, 0.25);
  const auto out = f.step(1.0, 1.0);
  EXPECT_EQ(out.y, 0.0);
  EXPECT_EQ(out.e, 1.0);
  EXPECT_EQ(f.weights(), std::vector<double>{0.5});
}

TEST(Lms, IdentifiesTwoTapPlantLikeWiener) {
  const auto x = randn(10000, 3);
  const auto d = fir({0.3, -0.1}, x);
  LmsFilter f(2, 0.01);
  for (std::size_t n = 0; n < x.size(); ++n) f.step(x[n], d[n]);
  const auto w = wiener_solve(x, d, 2);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(f.weights()[i], w[i], 1e-3);
    EXPECT_NEAR(f.weights()[i], i == 0 ? 0.3 : -0.1, 1e-3);
  }
}

TEST(Lms, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = randn(6, rng());
    const auto hist = randn(6, rng());
    LmsFilter f(w, 0.0);
    // load the delay line (oldest first) without changing weights
    for (int i = 5; i >= 1; --i) f.step(hist[i], 0.0);
    const double d = g(rng);
    const auto grad = f.gradient(hist[0], d);
    for (std::size_t i = 0; i < 6; ++i) {
      const double h = 1e-6;
      auto cost = [&](double delta) {
        double y = 0.0;
        for (std::size_t l = 0; l < 6; ++l) y += (l == i ? w[l] + delta : w[l]) * hist[l];
        return (d - y) * (d - y);
      };
      const double fd = (cost(h) - cost(-h)) / (2 * h);
      EXPECT_NEAR(grad[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Wiener, Examples) {
  const auto x = randn(5000, 4);
  auto w = wiener_solve(x, x, 2);
  EXPECT_NEAR(w[0], 1.0, 1e-6);
  EXPECT_NEAR(w[1], 0.0, 1e-6);

  std::vector<double> delayed(x.size(), 0.0);
  std::copy(x.begin(), x.end() - 1, delayed.begin() + 1);
  w = wiener_solve(x, delayed, 2);
  EXPECT_NEAR(w[0], 0.0, 1e-6);
  EXPECT_NEAR(w[1], 1.0, 1e-6);

  w = wiener_solve(x, fir({0.5, -0.25}, x), 2);
  EXPECT_NEAR(w[0], 0.5, 1e-6);
  EXPECT_NEAR(w[1], -0.25, 1e-6);
}

TEST(Wiener, Errors) {
  // an impulse on the last sample never reaches the second tap: rank one
  std::vector<double> late(100, 0.0);
  late.back() = 1.0;
  for (const auto& x : {std::vector<double>(100, 0.0), late}) {
    try {
      wiener_solve(x, x, 2);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Conditioning);
    }
  }
  const auto x = randn(19, 1);
  EXPECT_THROW(wiener_solve(x, x, 2), Error);
  EXPECT_THROW(wiener_solve(randn(50, 1), randn(49, 1), 2), Error);
}

TEST(MuBound, LmsExamples) {
  EXPECT_DOUBLE_EQ(lms_mu_bound(std::vector<double>(10, 1.0), 4), 0.25);
  EXPECT_DOUBLE_EQ(lms_mu_bound(std::vector<double>{1, -1, 1, -1}, 2), 0.5);
  const auto x = randn(100000, 9, 0.5);
  double p = 0.0;
  for (double v : x) p += v * v;
  p /= static_cast<double>(x.size());
  EXPECT_DOUBLE_EQ(lms_mu_bound(x, 8), 1.0 / (8 * p));
  EXPECT_NEAR(lms_mu_bound(x, 8), 1.0 / (8 * 0.25), 0.02 * 0.5);
  try {
    lms_mu_bound(std::vector<double>(5, 0.0), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UndefinedBound);
  }
}

TEST(MuBound, FxlmsExamples) {
  const std::vector<double> e(10, 1.0), n4(10, 4.0);
  EXPECT_DOUBLE_EQ(fxlms_mu_bound(e, n4), 0.5);

  // white x_f of unit power through an 8-tap history: E|Xf|^2 = 8
  const auto xf = randn(100000, 10);
  std::vector<double> norm_sq, ones;
  for (std::size_t n = 8; n < xf.size(); ++n) {
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += xf[n - i] * xf[n - i];
    norm_sq.push_back(s);
    ones.push_back(1.0);
  }
  EXPECT_NEAR(fxlms_mu_bound(ones, norm_sq), 0.25, 0.005);

  std::vector<double> quad(norm_sq);
  for (double& v : quad) v *= 4.0;  // doubled magnitudes
  EXPECT_DOUBLE_EQ(fxlms_mu_bound(ones, quad), fxlms_mu_bound(ones, norm_sq) / 4.0);

  const std::vector<double> zeros(10, 0.0);
  EXPECT_THROW(fxlms_mu_bound(e, zeros), Error);
}

TEST(Fxlms, IdentityPathReproducesLmsBitForBit) {
  const auto x = randn(1000, 12);
  const auto d = fir({0.4, 0.1, -0.3, 0.05}, x);
  LmsFilter lms(4, 0.02);
  FxlmsController fx(4, 0.02, FirFilter({1.0}));
  Plant plant = Plant::siso({1.0}, {1.0});  // e = d' + u with d' = -d
  for (std::size_t n = 0; n < x.size(); ++n) {
    const auto out = lms.step(x[n], d[n]);
    const double u = fx.filter(x[n]);
    const double e = -d[n] + u;
    fx.adapt(e);
    EXPECT_EQ(u, out.y);
    EXPECT_EQ(e, -out.e);
    ASSERT_EQ(fx.weights(), lms.weights()) << "step " << n;
  }
  (void)plant;
}

TEST(Fxlms, FilteredHistoryMatchesReplay) {
  const auto x = randn(300, 13);
  const std::vector<double> s{0.0, 0.5, 0.25, -0.1};
  FxlmsController fx(10, 0.0, FirFilter(s));
  for (double v : x) fx.filter(v);
  const auto xf = fir(s, x);
  const auto hist = fx.filtered_history();
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(hist[i], xf[xf.size() - 1 - i]);
}

TEST(Fxlms, ZeroStepIsAFixedFir) {
  const auto w = randn(8, 14), x = randn(500, 15), e = randn(500, 16);
  FxlmsController fx(w, 0.0, FirFilter({1.0}));
  FirFilter ref(w);
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_EQ(fx.step(x[n], e[n]), ref.process(x[n]));
}

TEST(Fxlms, FreezeMatchesZeroStepController) {
  FxlmsController trained(randn(8, 17), 0.01, FirFilter({0.0, 0.8}));
  const auto x0 = randn(200, 18);
  for (double v : x0) trained.step(v, 0.1 * v);
  FirFilter frozen = freeze(trained);
  FxlmsController still(trained.weights(), 0.0, FirFilter({0.0, 0.8}));
  const auto x = randn(300, 19);
  for (double v : x) EXPECT_EQ(frozen.process(v), still.step(v, 1.0));

  FxlmsController zero(8, 0.01, FirFilter({1.0}));
  FirFilter silent = freeze(zero);
  Plant plant = Plant::siso({0.0, 0.9}, {1.0});
  FirFilter primary({0.0, 0.9});
  for (double v : x) {
    const double u = silent.process(v);
    EXPECT_EQ(plant.step(v, std::vector<double>{u})[0], primary.process(v));
  }
}

TEST(Fxlms, GradientMatchesFiniteDifferencesThroughTheLoop) {
  std::mt19937_64 rng(20);
  std::normal_distribution<double> g;
  const std::size_t N = 6, M = 4;
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = randn(M, rng());
    const auto w = randn(N, rng());
    const auto x = randn(N + M + 5, rng());
    FxlmsController fx(w, 0.0, FirFilter(s));
    for (double v : x) fx.filter(v);
    const double d = g(rng);
    const std::size_t n = x.size() - 1;
    // e(W) = d + sum_i s_i * (W^T X(n - i)) with W held fixed over the path memory
    auto error = [&](const std::vector<double>& ww) {
      double e = d;
      for (std::size_t i = 0; i < M; ++i) {
        double u = 0.0;
        for (std::size_t l = 0; l < N; ++l) u += ww[l] * x[n - i - l];
        e += s[i] * u;
      }
      return e;
    };
    const double e = error(w);
    const auto grad = fx.gradient(e);
    for (std::size_t l = 0; l < N; ++l) {
      const double h = 1e-6;
      auto wp = w, wm = w;
      wp[l] += h;
      wm[l] -= h;
      const double fd = (std::pow(error(wp), 2) - std::pow(error(wm), 2)) / (2 * h);
      EXPECT_NEAR(grad[l], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Lms, DivergesAboveTheBound) {
  const auto x = randn(100000, 21);
  const auto d = fir({0.5, -0.2, 0.1, 0.05}, x);
  LmsFilter f(4, 10.0 * lms_mu_bound(x, 4));
  try {
    for (std::size_t n = 0; n < x.size(); ++n) f.step(x[n], d[n]);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_LT(e.sample_index(), 100000u);
  }
}

TEST(Lms, DeterministicTrajectories) {
  auto run = [] {
    const auto x = randn(2000, 22);
    const auto d = fir({0.2, 0.7}, x);
    LmsFilter f(3, 0.01);
    std::vector<double> all;
    for (std::size_t n = 0; n < x.size(); ++n) {
      f.step(x[n], d[n]);
      all.insert(all.end(), f.weights().begin(), f.weights().end());
    }
    return all;
  };
  EXPECT_EQ(run(), run());
}

TEST(ConvergenceTrace, Examples) {
  const std::vector<double> w_opt{0.5, -0.5};
  WeightRecorder at_opt;
  for (int n = 0; n < 10; ++n) at_opt.record(w_opt, 0.1);
  for (double m : convergence_trace(at_opt, w_opt).msd) EXPECT_EQ(m, 0.0);

  WeightRecorder zero;
  for (int n = 0; n < 10; ++n) zero.record(std::vector<double>{0.0, 0.0}, 0.5);
  const auto t = convergence_trace(zero, w_opt);
  for (double m : t.msd) EXPECT_DOUBLE_EQ(m, 0.5);
  for (double m : t.mse) EXPECT_DOUBLE_EQ(m, 0.25);

  EXPECT_THROW(convergence_trace(zero, std::vector<double>{1.0}), Error);

  WeightRecorder dec(4);
  for (int n = 0; n < 10; ++n) dec.record(w_opt, 0.0);
  EXPECT_EQ(dec.snapshots().size(), 3u);
}

TEST(ConvergenceTrace, DeviationShrinksForStableStep) {
  const auto x = randn(20000, 23);
  const auto d = fir({0.3, 0.2, -0.1, 0.05}, x);
  const auto w_opt = wiener_solve(x, d, 4);
  LmsFilter f(4, 0.1 * lms_mu_bound(x, 4));
  WeightRecorder rec(10);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const auto out = f.step(x[n], d[n]);
    rec.record(f.weights(), out.e);
  }
  const auto t = convergence_trace(rec, w_opt);
  const std::size_t dec = t.msd.size() / 10;
  const double first = std::accumulate(t.msd.begin(), t.msd.begin() + dec, 0.0);
  const double last = std::accumulate(t.msd.end() - dec, t.msd.end(), 0.0);
  EXPECT_LT(last, first);
  EXPECT_LT(norm(f.weights()) - norm(w_opt), 1e-2);
}
