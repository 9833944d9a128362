#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "anc/error.hpp"
#include "anc/metrics.hpp"

using namespace anc;

namespace {

constexpr double kFs = 8000.0;

Signal white(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return Signal(std::move(v), kFs);
}

Signal tones(std::size_t n, std::initializer_list<double> freqs) {
  std::vector<double> v(n, 0.0);
  for (double f : freqs) {
    for (std::size_t i = 0; i < n; ++i) v[i] += std::sin(2 * M_PI * f * i / kFs);
  }
  return Signal(std::move(v), kFs);
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST(NoiseReduction, Examples) {
  const auto d = white(8000, 1);
  for (const auto& l : noise_reduction_per_interval(d, d, 0.25)) {
    ASSERT_TRUE(l.finite());
    EXPECT_EQ(l.db, 0.0);
  }
  for (const auto& l : noise_reduction_per_interval(d, d.scaled(0.1), 0.25)) EXPECT_NEAR(l.db, 20.0, 1e-12);

  std::vector<double> staged(d.samples());
  for (std::size_t i = 4000; i < 8000; ++i) staged[i] /= std::sqrt(10.0);
  const auto nr = noise_reduction_per_interval(d, Signal(staged, kFs), 0.5);
  ASSERT_EQ(nr.size(), 2u);
  EXPECT_NEAR(nr[0].db, 0.0, 1e-12);
  EXPECT_NEAR(nr[1].db, 10.0, 1e-12);
}

TEST(NoiseReduction, MarkersAndPartialIntervals) {
  const auto d = white(8000, 2);
  const auto nr = noise_reduction_per_interval(d, Signal::zeros(8000, kFs), 0.3);
  ASSERT_EQ(nr.size(), 3u);  // 0.9 s used, trailing 0.1 s dropped
  for (const auto& l : nr) EXPECT_EQ(l.kind, Level::Kind::Unbounded);
  const auto silent = noise_reduction_per_interval(Signal::zeros(800, kFs), Signal::zeros(800, kFs), 0.05);
  for (const auto& l : silent) EXPECT_EQ(l.kind, Level::Kind::Undefined);
  EXPECT_THROW(noise_reduction_per_interval(d, white(7999, 3), 1.0), Error);
  EXPECT_THROW(noise_reduction_per_interval(d, d, 0.0), Error);
}

TEST(Snr, ExamplesAndEqualsSingleIntervalNr) {
  const auto d = white(16000, 4);
  EXPECT_EQ(snr_overall(d, d).db, 0.0);
  EXPECT_NEAR(snr_overall(d, d.scaled(0.1)).db, 20.0, 1e-12);
  const auto e = white(16000, 5, 0.3);
  const auto nr = noise_reduction_per_interval(d, e, 2.0);
  ASSERT_EQ(nr.size(), 1u);
  EXPECT_EQ(nr[0], snr_overall(d, e));
  EXPECT_EQ(snr_overall(d, Signal::zeros(16000, kFs)).kind, Level::Kind::Unbounded);
}

TEST(Snr, InvariantToCommonScaling) {
  const auto d = white(8000, 6), e = white(8000, 7, 0.2);
  const double a = snr_overall(d, e).db, b = snr_overall(d.scaled(3.7), e.scaled(3.7)).db;
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(PowerSpectrum, ToneLocation) {
  const auto s = power_spectrum(tones(16384, {1000.0}), 1024, 0.5);
  EXPECT_DOUBLE_EQ(s.freq_hz[argmax(s.power)], 1000.0);
  const auto two = power_spectrum(tones(16384, {200.0, 2000.0}), 1024, 0.5);
  auto p = two.power;
  const std::size_t first = argmax(p);
  // neighbouring bins of the same peak are Hann leakage, skip them
  for (std::size_t b = first > 2 ? first - 2 : 0; b <= first + 2 && b < p.size(); ++b) p[b] = 0.0;
  const std::size_t second = argmax(p);
  std::vector<double> peaks{two.freq_hz[first], two.freq_hz[second]};
  std::sort(peaks.begin(), peaks.end());
  // 200 Hz is not on the 7.8125 Hz grid: nearest bin
  EXPECT_NEAR(peaks[0], 200.0, 7.8125 / 2);
  EXPECT_DOUBLE_EQ(peaks[1], 2000.0);
}

TEST(PowerSpectrum, ParsevalWithinOnePercent) {
  const auto x = white(1 << 17, 8);
  const auto s = power_spectrum(x, 1024, 0.5);
  const double total = std::accumulate(s.power.begin(), s.power.end(), 0.0);
  EXPECT_NEAR(total / x.power(), 1.0, 0.01);
}

TEST(PowerSpectrum, WhiteNoiseIsFlat) {
  // 100 averages without overlap: each bin is chi-square with 200 dof, spread well inside 3 dB
  const auto x = white(1024 * 100, 9);
  const auto s = power_spectrum(x, 1024, 0.0);
  EXPECT_EQ(s.segments, 100u);
  const double mean_bin = x.power() / 512.0;
  for (std::size_t b = 1; b + 1 < s.power.size(); ++b) {
    EXPECT_LT(std::abs(10 * std::log10(s.power[b] / mean_bin)), 3.0) << "bin " << b;
  }
}

TEST(PowerSpectrum, Errors) {
  EXPECT_THROW(power_spectrum(white(512, 1), 1024, 0.5), Error);
  EXPECT_THROW(power_spectrum(white(4096, 1), 1000, 0.5), Error);
  EXPECT_THROW(power_spectrum(white(4096, 1), 1024, 1.0), Error);
}

TEST(Spectrogram, ToneSwitch) {
  std::vector<double> v(16000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(2 * M_PI * (i < 8000 ? 500.0 : 1500.0) * i / kFs);
  const auto sg = spectrogram(Signal(v, kFs), 512, 256);
  for (std::size_t f = 0; f < sg.power_db.size(); ++f) {
    const double start = sg.frame_time_s[f], end = start + 512 / kFs;
    const double peak = sg.freq_hz[argmax(sg.power_db[f])];
    if (end <= 1.0) EXPECT_DOUBLE_EQ(peak, 500.0) << f;
    if (start >= 1.0) EXPECT_DOUBLE_EQ(peak, 1500.0) << f;
  }
}

TEST(Spectrogram, SilenceHitsTheFloor) {
  const auto sg = spectrogram(Signal::zeros(4096, kFs), 1024, 512);
  for (const auto& frame : sg.power_db) {
    for (double v : frame) EXPECT_EQ(v, kDbFloor);
  }
}

TEST(Spectrogram, ChirpPeakIsNonDecreasing) {
  const std::size_t n = 16000;
  std::vector<double> v(n);
  const double f0 = 100.0, f1 = 1000.0, T = n / kFs;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / kFs;
    v[i] = std::sin(2 * M_PI * (f0 * t + 0.5 * (f1 - f0) / T * t * t));
  }
  const auto sg = spectrogram(Signal(v, kFs), 1024, 512);
  double prev = 0.0;
  for (const auto& frame : sg.power_db) {
    const double peak = sg.freq_hz[argmax(frame)];
    EXPECT_GE(peak, prev);
    prev = peak;
  }
}

TEST(Db, ClampFloor) {
  EXPECT_EQ(clamp_db(0.0), kDbFloor);
  EXPECT_EQ(clamp_db(1e-30), kDbFloor);
  EXPECT_DOUBLE_EQ(clamp_db(0.01), -20.0);
}
