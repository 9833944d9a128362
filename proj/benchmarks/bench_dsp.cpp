#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "anc/acoustics.hpp"
#include "anc/adaptation.hpp"
#include "anc/filter.hpp"
#include "anc/mcanc.hpp"
#include "anc/metrics.hpp"

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

constexpr std::size_t kBlock = 4096;

void BM_FirStep(benchmark::State& state) {
  const auto taps = static_cast<std::size_t>(state.range(0));
  anc::FirFilter f(noise(taps, 1));
  const auto x = noise(kBlock, 2);
  for (auto _ : state) {
    double acc = 0.0;
    for (double v : x) acc += f.process(v);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBlock));
}
BENCHMARK(BM_FirStep)->Arg(16)->Arg(64)->Arg(128)->Arg(512);

void BM_FxlmsLoop(benchmark::State& state) {
  const auto taps = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  const auto p = anc::synthesize_path(anc::default_primary_path(), rng);
  const auto s = anc::synthesize_path(anc::default_secondary_path(), rng);
  const auto x = noise(kBlock, 4);
  for (auto _ : state) {
    state.PauseTiming();
    anc::Plant plant = anc::Plant::siso(p, s);
    anc::FxlmsController ctrl(taps, 1e-4, anc::FirFilter(s));
    state.ResumeTiming();
    for (double v : x) {
      const double u = ctrl.filter(v);
      ctrl.adapt(plant.step(v, std::span<const double>(&u, 1))[0]);
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBlock));
}
BENCHMARK(BM_FxlmsLoop)->Arg(64)->Arg(128)->Arg(256);

void BM_McAncStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const anc::ChannelConfig cfg{n, n, n, 64, 16};
  std::vector<std::vector<anc::FirFilter>> est(n, std::vector<anc::FirFilter>(n, anc::FirFilter(noise(16, 5))));
  anc::McAncController ctrl(cfg, 1e-6, est);
  const auto x = noise(kBlock * n, 6);
  const auto e = noise(kBlock * n, 7);
  std::vector<double> u(n);
  for (auto _ : state) {
    for (std::size_t i = 0; i < kBlock; ++i) {
      ctrl.filter(std::span<const double>(x).subspan(i * n, n), u);
      ctrl.adapt(std::span<const double>(e).subspan(i * n, n));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBlock));
  state.counters["macs_per_sample"] = static_cast<double>(anc::mac_count(cfg).total());
}
BENCHMARK(BM_McAncStep)->DenseRange(1, 4);

void BM_PowerSpectrum(benchmark::State& state) {
  const anc::Signal x(noise(8000 * 20, 8), 8000.0);
  for (auto _ : state) benchmark::DoNotOptimize(anc::power_spectrum(x, 1024, 0.5));
}
BENCHMARK(BM_PowerSpectrum)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
