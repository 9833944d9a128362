#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "anc/acoustics.hpp"
#include "anc/adaptation.hpp"
#include "anc/error.hpp"
#include "anc/mcanc.hpp"

using namespace anc;

namespace {

std::vector<double> randn(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<std::vector<FirFilter>> grid(std::size_t J, std::size_t K, std::size_t M, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<std::vector<FirFilter>> out(J);
  for (auto& row : out) {
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<double> t(M);
      for (auto& v : t) v = g(rng);
      row.emplace_back(std::move(t));
    }
  }
  return out;
}

}  // namespace

TEST(Mac, ClosedFormExamples) {
  EXPECT_EQ(mac_count({1, 1, 1, 32, 32}).total(), 97u);
  const auto b = mac_count({2, 2, 2, 4, 4});
  EXPECT_EQ(b.total(), 82u);
  EXPECT_EQ(b.control_output, 16u);
  EXPECT_EQ(b.filtered_reference, 32u);
  EXPECT_EQ(b.weight_update, 34u);
  EXPECT_EQ(mac_count_standard(2, 4), 82u);
}

TEST(Mac, CubicScalingExhaustive) {
  for (std::uint64_t n = 1; n <= 16; ++n) {
    for (std::uint64_t l = 1; l <= 16; ++l) {
      EXPECT_EQ(mac_count({n, n, n, l, l}).total(), mac_count_standard(n, l));
    }
  }
}

TEST(Mac, MeasuredMatchesFormula) {
  for (std::size_t i = 1; i <= 3; ++i) {
    for (std::size_t j = 1; j <= 3; ++j) {
      for (std::size_t k = 1; k <= 3; ++k) {
        const ChannelConfig cfg{i, j, k, 4, 8};
        const auto m = mac_measure(cfg, 100);
        EXPECT_EQ(m.total, 100 * mac_count(cfg).total());
        EXPECT_EQ(m.per_sample, mac_count(cfg).total());
      }
    }
  }
  EXPECT_EQ(mac_measure({2, 2, 2, 4, 4}, 10).per_sample, 82u);
}

TEST(Mac, LeastSquaresRecoversStandardCoefficients) {
  // fit a N^3 + b N^2 + c N to measured counts at L = M = 8
  Eigen::Matrix<double, 4, 3> A;
  Eigen::Vector4d y;
  for (int n = 1; n <= 4; ++n) {
    const auto un = static_cast<std::size_t>(n);
    A.row(n - 1) << n * n * n, n * n, n;
    y(n - 1) = static_cast<double>(mac_measure({un, un, un, 8, 8}, 5).per_sample);
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
  EXPECT_NEAR(c(0), 16.0, 1e-9);
  EXPECT_NEAR(c(1), 8.0, 1e-9);
  EXPECT_NEAR(c(2), 1.0, 1e-9);
}

TEST(McAnc, ReducesToSingleChannelBitForBit) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = randn(6, seed)[0] > 0 ? std::vector<double>{0.0, 0.5, 0.25} : std::vector<double>{0.2, -0.4};
    const double mu = 0.003;
    FxlmsController single(16, mu, FirFilter(s));
    McAncController multi({1, 1, 1, 16, s.size()}, 2 * mu, {{FirFilter(s)}});
    const auto x = randn(1000, seed + 100), e = randn(1000, seed + 200);
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double u1 = single.filter(x[n]);
      const auto u2 = multi.filter(std::vector<double>{x[n]});
      ASSERT_EQ(u1, u2[0]);
      single.adapt(e[n]);
      multi.adapt(std::vector<double>{e[n]});
      ASSERT_EQ(std::vector<double>(multi.weights(0, 0).begin(), multi.weights(0, 0).end()), single.weights());
    }
  }
}

TEST(McAnc, ZeroStepZeroWeightsIsSilent) {
  McAncController c({1, 2, 2, 8, 4}, 0.0, grid(2, 2, 4, 1));
  const auto x = randn(200, 2);
  for (double v : x) {
    const auto u = c.step(std::vector<double>{v}, std::vector<double>{0.3, -0.7});
    EXPECT_EQ(u[0], 0.0);
    EXPECT_EQ(u[1], 0.0);
  }
}

TEST(McAnc, DiagonalPathsDecouple) {
  std::vector<std::vector<FirFilter>> est{{FirFilter({1.0}), FirFilter({0.0})}, {FirFilter({0.0}), FirFilter({1.0})}};
  const double mu = 0.01;
  McAncController multi({1, 2, 2, 8, 1}, 2 * mu, est);
  FxlmsController a(8, mu, FirFilter({1.0})), b(8, mu, FirFilter({1.0}));
  const auto x = randn(1000, 3), d1 = randn(1000, 4), d2 = randn(1000, 5);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const auto u = multi.filter(std::vector<double>{x[n]});
    const double ua = a.filter(x[n]), ub = b.filter(x[n]);
    ASSERT_EQ(u[0], ua);
    ASSERT_EQ(u[1], ub);
    const std::vector<double> e{d1[n] + u[0], d2[n] + u[1]};
    multi.adapt(e);
    a.adapt(e[0]);
    b.adapt(e[1]);
  }
  EXPECT_EQ(std::vector<double>(multi.weights(0, 0).begin(), multi.weights(0, 0).end()), a.weights());
  EXPECT_EQ(std::vector<double>(multi.weights(0, 1).begin(), multi.weights(0, 1).end()), b.weights());
}

TEST(McAnc, MicPermutationLeavesOutputsUnchanged) {
  const auto est = grid(2, 2, 4, 6);
  std::vector<std::vector<FirFilter>> swapped{{est[0][1], est[0][0]}, {est[1][1], est[1][0]}};
  McAncController c1({1, 2, 2, 8, 4}, 0.005, est), c2({1, 2, 2, 8, 4}, 0.005, swapped);
  const auto x = randn(500, 7), e1 = randn(500, 8), e2 = randn(500, 9);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const auto u1 = c1.step(std::vector<double>{x[n]}, std::vector<double>{e1[n], e2[n]});
    const auto u2 = c2.step(std::vector<double>{x[n]}, std::vector<double>{e2[n], e1[n]});
    ASSERT_EQ(u1, u2);
  }
}

TEST(McAnc, ConvergesOnTwoToneTwoByTwoPlant) {
  std::mt19937_64 rng(10);
  std::vector<std::vector<FirFilter>> P(1), S(2);
  for (int k = 0; k < 2; ++k) {
    SyntheticPath p = default_primary_path();
    p.delay += k;
    P[0].emplace_back(synthesize_path(p, rng));
  }
  for (auto& row : S) {
    for (int k = 0; k < 2; ++k) row.emplace_back(synthesize_path(default_secondary_path(), rng));
  }
  Plant plant(P, S);
  McAncController c({1, 2, 2, 16, 16}, 0.002, S);
  const double fs = 8000.0;
  const std::size_t n_total = 40000;
  std::vector<double> u(2), e(2, 0.0);
  double pd = 0.0, pe = 0.0;
  Plant open(P, S);
  for (std::size_t n = 0; n < n_total; ++n) {
    const double x = std::sin(2 * M_PI * 200 * n / fs) + 0.5 * std::sin(2 * M_PI * 570 * n / fs);
    c.filter(std::vector<double>{x}, u);
    plant.step(std::vector<double>{x}, u, e);
    const auto d = open.step(x, std::vector<double>{0.0, 0.0});
    c.adapt(e);
    if (n >= n_total - 8000) {
      pd += d[0] * d[0] + d[1] * d[1];
      pe += e[0] * e[0] + e[1] * e[1];
    }
  }
  EXPECT_GT(10 * std::log10(pd / pe), 15.0);
}

TEST(McAnc, DimensionAndDivergenceErrors) {
  EXPECT_THROW(McAncController({1, 2, 2, 8, 4}, 0.1, grid(1, 2, 4, 1)), Error);
  EXPECT_THROW(McAncController({1, 2, 2, 8, 4}, 0.1, grid(2, 2, 3, 1)), Error);
  EXPECT_THROW(ChannelConfig({0, 1, 1, 1, 1}).validate(), Error);
  McAncController c({1, 1, 1, 4, 1}, 1e3, {{FirFilter({1.0})}});
  EXPECT_THROW(c.filter(std::vector<double>{1.0, 2.0}), Error);
  try {
    for (int n = 0; n < 1000; ++n) {
      const auto u = c.filter(std::vector<double>{1.0});
      c.adapt(std::vector<double>{1.0 + u[0]});
    }
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_LT(e.sample_index(), 1000u);
  }
}
