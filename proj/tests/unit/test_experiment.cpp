#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "anc/error.hpp"
#include "anc/experiment.hpp"
#include "anc/report.hpp"
#include "anc/wav.hpp"

using namespace anc;
namespace fs = std::filesystem;

namespace {

const char* kTone = R"({
  "schema_version": 1, "sample_rate_hz": 8000, "duration_s": 4, "seed": 3,
  "noise_sources": [{"kind": "tone", "freq_hz": 200}],
  "plant": {"measurement_noise_std": 0.0},
  "controller": {"taps": 32},
  "sysid": {"taps": 16},
  "fixed_filter": {"max_duration_s": 6}
})";

ErrorKind config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Data;  // sentinel: accepted
}

std::string with(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  s.replace(at, from.size(), to);
  return s;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "anc_experiment_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

NoiseSourceSpec band(double lo, double hi) {
  NoiseSourceSpec s;
  s.kind = NoiseSourceSpec::Kind::BandNoise;
  s.low_hz = lo;
  s.high_hz = hi;
  return s;
}

NoiseSourceSpec tone(double f) {
  NoiseSourceSpec s;
  s.kind = NoiseSourceSpec::Kind::Tone;
  s.freq_hz = f;
  return s;
}

}  // namespace

TEST(Config, ParsesDefaults) {
  const auto cfg = parse_config(kTone);
  EXPECT_EQ(cfg.total_samples(), 32000u);
  EXPECT_EQ(cfg.controller.taps, 32u);
  EXPECT_FALSE(cfg.controller.mu.has_value());
  EXPECT_EQ(cfg.plant.secondary.synthetic.length, 16u);
  EXPECT_EQ(cfg.metrics.psd_segment, 1024u);
}

TEST(Config, UnknownKeysAreErrors) {
  EXPECT_EQ(config_error(with(kTone, "\"seed\": 3", "\"seed\": 3, \"sed\": 1")), ErrorKind::Config);
  EXPECT_EQ(config_error(with(kTone, "\"taps\": 32", "\"taps\": 32, \"tap\": 1")), ErrorKind::Config);
  EXPECT_EQ(config_error(with(kTone, "\"freq_hz\": 200", "\"freq_hz\": 200, \"volume\": 1")), ErrorKind::Config);
  try {
    parse_config(with(kTone, "\"taps\": 16", "\"taps\": 16, \"oops\": 1"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("oops"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("config.sysid"), std::string::npos);
  }
}

TEST(Config, ValidationErrors) {
  EXPECT_EQ(config_error("not json"), ErrorKind::Config);
  EXPECT_EQ(config_error(with(kTone, "\"schema_version\": 1", "\"schema_version\": 2")), ErrorKind::Config);
  EXPECT_EQ(config_error(with(kTone, "{\"kind\": \"tone\", \"freq_hz\": 200}",
                              R"({"kind": "wav", "path": "/no/such/file.wav"})")),
            ErrorKind::Config);
  const std::string two_band = with(kTone, "{\"kind\": \"tone\", \"freq_hz\": 200}",
                                    R"({"kind": "band_noise", "low_hz": 50, "high_hz": 14000})");
  EXPECT_EQ(config_error(two_band), ErrorKind::Config);
  EXPECT_EQ(config_error(with(two_band, "14000", "14000, \"clip_to_nyquist\": true")), ErrorKind::Data);
  const std::string pair = with(kTone, "{\"kind\": \"tone\", \"freq_hz\": 200}",
                                R"({"kind": "tone", "freq_hz": 200}, {"kind": "tone", "freq_hz": 300})");
  EXPECT_EQ(config_error(with(pair, "\"plant\"", "\"composition\": {\"switch_times_s\": [5]}, \"plant\"")),
            ErrorKind::Config);
  EXPECT_EQ(config_error(with(pair, "\"plant\"", "\"composition\": {\"switch_times_s\": [2]}, \"plant\"")),
            ErrorKind::Data);
  EXPECT_EQ(config_error(with(kTone, "\"taps\": 32", "\"taps\": 32, \"reference\": \"per_source\"")),
            ErrorKind::Config);
  EXPECT_EQ(config_error(with(kTone, "\"measurement_noise_std\": 0.0", "\"mics\": 2")), ErrorKind::Config);
}

TEST(Config, HashTracksContentAndSeed) {
  auto a = parse_config(kTone), b = parse_config(kTone);
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 4;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(parse_config(with(kTone, "\"duration_s\": 4", "\"duration_s\": 5"))));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Synthesis, ToneIsUnitAmplitude) {
  const auto s = synthesize_noise(tone(200.0), 8000.0, 1.0, 1);
  ASSERT_EQ(s.size(), 8000u);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i], std::sin(2 * M_PI * 200.0 / 8000.0 * i));
}

TEST(Synthesis, BandNoiseIsBandLimitedUnitPowerAndSeeded) {
  const auto s = synthesize_noise(band(40, 1400), 8000.0, 20.0, 7);
  EXPECT_NEAR(s.power(), 1.0, 1e-12);
  const auto psd = power_spectrum(s, 1024, 0.5);
  double in = 0.0, out = 0.0;
  std::size_t n_in = 0, n_out = 0;
  for (std::size_t b = 0; b < psd.freq_hz.size(); ++b) {
    const double f = psd.freq_hz[b];
    // transition bands of the 2001-tap design are ~16 Hz wide; leave a guard
    if (f >= 60 && f <= 1380) {
      in += psd.power[b];
      ++n_in;
    } else if (f <= 20 || f >= 1420) {
      out += psd.power[b];
      ++n_out;
    }
  }
  EXPECT_LT(10 * std::log10((out / n_out) / (in / n_in)), -30.0);
  EXPECT_EQ(synthesize_noise(band(40, 1400), 8000.0, 2.0, 7), synthesize_noise(band(40, 1400), 8000.0, 2.0, 7));
  EXPECT_NE(synthesize_noise(band(40, 1400), 8000.0, 2.0, 7), synthesize_noise(band(40, 1400), 8000.0, 2.0, 8));
}

TEST(Synthesis, BandAboveNyquistNeedsClipping) {
  auto spec = band(50, 14000);
  EXPECT_THROW(synthesize_noise(spec, 8000.0, 1.0, 1), Error);
  spec.clip_to_nyquist = true;
  EXPECT_NEAR(synthesize_noise(spec, 8000.0, 1.0, 1).power(), 1.0, 1e-12);
}

TEST(Synthesis, WavSourcesLoop) {
  const auto dir = scratch("wav");
  const Signal rec({0.25, -0.5, 0.75}, 8000.0);
  write_wav(dir / "r.wav", rec);
  NoiseSourceSpec s;
  s.kind = NoiseSourceSpec::Kind::Wav;
  s.path = dir / "r.wav";
  const auto out = synthesize_noise(s, 8000.0, 7.0 / 8000.0, 0);
  EXPECT_EQ(out.samples(), (std::vector<double>{0.25, -0.5, 0.75, 0.25, -0.5, 0.75, 0.25}));
  EXPECT_THROW(synthesize_noise(s, 16000.0, 1.0, 0), Error);
}

TEST(Compose, ConcatenateAndMix) {
  const auto a = synthesize_noise(band(100, 900), 8000.0, 1.0, 1);
  const auto b = synthesize_noise(band(100, 900), 8000.0, 1.0, 2);
  std::vector<Signal> ab{a, b};
  CompositionSpec cat;
  const auto joined = compose(ab, cat);
  ASSERT_EQ(joined.size(), 16000u);
  EXPECT_EQ(joined.slice(0, 8000), a);
  EXPECT_EQ(joined.slice(8000, 8000), b);

  CompositionSpec mix{CompositionSpec::Mode::Mix, {}, {0.5, 0.5}};
  std::vector<Signal> aa{a, a};
  const auto m = compose(aa, mix);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(m[i], a[i], 1e-12);

  const auto parts = compose_components(ab, CompositionSpec{CompositionSpec::Mode::Mix, {}, {1.0, 0.3}});
  for (std::size_t i = 0; i < 8000; ++i) {
    EXPECT_EQ(parts.reference[i], parts.components[0][i] + parts.components[1][i]);
  }
  EXPECT_NEAR(parts.reference.power(), 1.0, 1e-12);

  std::vector<Signal> mixed_rates{a, Signal({1.0}, 16000.0)};
  EXPECT_THROW(compose(mixed_rates, mix), Error);
}

TEST(Compose, MixedTonesSitThreeDecibelsDown) {
  // 1000 and 2000 Hz fall on exact bins of a 1024-point frame at 8 kHz
  const auto t1 = synthesize_noise(tone(1000.0), 8000.0, 4.0, 0);
  const auto t2 = synthesize_noise(tone(2000.0), 8000.0, 4.0, 0);
  CompositionSpec mix{CompositionSpec::Mode::Mix, {}, {}};
  std::vector<Signal> one{t1}, two{t1, t2};
  const auto ref = power_spectrum(compose(one, mix), 1024, 0.5);
  const auto both = power_spectrum(compose(two, mix), 1024, 0.5);
  const std::size_t b1 = 128, b2 = 256;
  EXPECT_NEAR(both.power_db[b1] - ref.power_db[b1], -10 * std::log10(2.0), 0.05);
  EXPECT_NEAR(both.power_db[b2] - ref.power_db[b1], -10 * std::log10(2.0), 0.05);
}

TEST(Scenario, TrivialPlantIsSilentWithUndefinedNr) {
  auto cfg = parse_config(with(kTone, "\"measurement_noise_std\": 0.0",
                               "\"measurement_noise_std\": 0.0, \"primary\": {\"taps\": [0.0]}"));
  cfg.fixed.max_duration_s = 2.0;
  const auto r = run_scenario(cfg);
  ASSERT_EQ(r.arms.size(), 3u);
  for (const auto& arm : r.arms) {
    EXPECT_FALSE(arm.diverged);
    for (double v : arm.error[0].samples()) EXPECT_EQ(v, 0.0);
    ASSERT_EQ(arm.nr_per_interval.size(), 4u);
    for (const auto& l : arm.nr_per_interval) EXPECT_EQ(l.kind, Level::Kind::Undefined);
    EXPECT_EQ(arm.snr.kind, Level::Kind::Undefined);
  }
}

TEST(Scenario, UncontrolledArmIsThePrimaryFilteredReference) {
  const auto cfg = parse_config(kTone);
  const auto r = run_scenario(cfg);
  const auto plant = build_plant(cfg);
  FirFilter p = plant.primary_path(0, 0);
  const auto sig = synthesize_scenario(cfg);
  const auto want = p.process(sig.composition.reference);
  EXPECT_EQ(r.arm("uncontrolled")->error[0], want);
  EXPECT_EQ(r.arm("adaptive")->disturbance[0], want);
}

TEST(Scenario, FixedFilterTrainedOnSameNoiseLeadsFirstInterval) {
  const auto r = run_scenario(parse_config(kTone));
  const auto& a = r.arm("adaptive")->nr_per_interval;
  const auto& f = r.arm("fixed")->nr_per_interval;
  ASSERT_TRUE(a[0].finite() && f[0].finite());
  EXPECT_GE(f[0].db, a[0].db);
  EXPECT_TRUE(r.pretrain.converged);
}

TEST(Scenario, FrozenReplayKeepsAdaptiveSteadyState) {
  // training and evaluation share source and plant; only the noise realization differs
  const auto cfg = parse_config(R"({
    "schema_version": 1, "sample_rate_hz": 8000, "duration_s": 10, "seed": 5,
    "noise_sources": [{"kind": "band_noise", "low_hz": 100, "high_hz": 2000}],
    "plant": {"measurement_noise_std": 0.003},
    "controller": {"taps": 64}, "sysid": {"taps": 32}
  })");
  const auto r = run_scenario(cfg);
  const auto& a = r.arm("adaptive")->nr_per_interval;
  const auto& f = *r.arm("fixed");
  ASSERT_TRUE(a.back().finite() && f.snr.finite());
  EXPECT_GT(f.snr.db, a.back().db - 1.0);
}

TEST(Scenario, DivergenceGivesPartialResult) {
  auto cfg = parse_config(with(kTone, "\"taps\": 32", "\"taps\": 32, \"mu\": 5.0"));
  const auto r = run_scenario(cfg, {false, WeightSet::single(std::vector<double>(32, 0.0), std::vector<double>(16, 0.0))});
  EXPECT_TRUE(r.any_diverged());
  const auto* a = r.arm("adaptive");
  ASSERT_TRUE(a->diverged);
  ASSERT_TRUE(a->divergence_index.has_value());
  EXPECT_EQ(a->error[0].size(), *a->divergence_index + 1);
  EXPECT_FALSE(r.arm("fixed")->diverged);
  EXPECT_EQ(r.arm("fixed")->error[0].size(), cfg.total_samples());
}

TEST(Scenario, FixedWeightsMustMatchGeometry) {
  const auto cfg = parse_config(kTone);
  try {
    run_scenario(cfg, {false, WeightSet::single(std::vector<double>(8, 0.0), std::vector<double>(16, 0.0))});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(Scenario, ParallelArmsMatchSequential) {
  const auto cfg = parse_config(kTone);
  const auto a = run_scenario(cfg, {false, {}}), b = run_scenario(cfg, {true, {}});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.arms[i].error, b.arms[i].error);
  EXPECT_EQ(summarize(a), summarize(b));
}

TEST(Scenario, MultichannelPerSourceReferences) {
  const auto cfg = parse_config(R"({
    "schema_version": 1, "sample_rate_hz": 8000, "duration_s": 3, "seed": 9,
    "noise_sources": [
      {"kind": "tone", "freq_hz": 300},
      {"kind": "tone", "freq_hz": 700, "primary_path": {"synthetic": {"delay": 10, "gain": 0.5}}}],
    "composition": {"mode": "mix"},
    "plant": {"sources": 2, "mics": 2},
    "controller": {"type": "multichannel", "reference": "per_source", "taps": 32},
    "sysid": {"taps": 16},
    "fixed_filter": {"max_duration_s": 3}
  })");
  const auto r = run_scenario(cfg);
  EXPECT_EQ(r.adaptive_weights.references, 2u);
  EXPECT_EQ(r.adaptive_weights.sources, 2u);
  EXPECT_EQ(r.arm("adaptive")->error.size(), 2u);
  EXPECT_GT(r.arm("adaptive")->nr_per_interval.back().db, 10.0);
  // only the training source's reference channel was ever excited
  const auto& w = r.fixed_weights.weights;
  for (std::size_t q = 2 * 32; q < w.size(); ++q) EXPECT_EQ(w[q], 0.0);
}

TEST(Summary, JsonRoundTripIsExact) {
  const auto r = run_scenario(parse_config(kTone));
  const auto s = summarize(r);
  EXPECT_EQ(summary_from_json(summary_to_json(s)), s);
  EXPECT_EQ(s.provenance.version, version_string());
  EXPECT_EQ(s.arms.size(), 3u);
}

TEST(Report, EmptyArmsGiveHeaderOnlyCsvs) {
  ScenarioResult r;
  r.sample_rate_hz = 8000.0;
  ArmReport empty;
  empty.name = "adaptive";
  r.arms.push_back(empty);
  const auto dir = scratch("empty");
  export_report(r, dir);
  EXPECT_EQ(slurp(dir / "adaptive_timeseries.csv"), "sample,time_s,mic,disturbance,error\n");
  EXPECT_EQ(slurp(dir / "adaptive_nr.csv"), "interval,start_s,end_s,status,nr_db\n");
  EXPECT_EQ(slurp(dir / "adaptive_psd.csv"), "freq_hz,power,power_db\n");
  EXPECT_EQ(slurp(dir / "adaptive_spectrogram.csv"), "frame,time_s,freq_hz,power_db\n");
  EXPECT_EQ(slurp(dir / "adaptive_trace.csv"), "sample,mse,msd\n");
  EXPECT_EQ(summary_from_json(slurp(dir / "summary.json")), summarize(r));
}

TEST(Report, RepeatedExportsAreByteIdentical) {
  const auto cfg = parse_config(kTone);
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  const auto f1 = export_report(run_scenario(cfg), d1, 8);
  const auto f2 = export_report(run_scenario(cfg), d2, 8);
  ASSERT_EQ(f1.size(), f2.size());
  for (std::size_t i = 0; i < f1.size(); ++i) {
    EXPECT_EQ(f1[i].filename(), f2[i].filename());
    EXPECT_EQ(slurp(f1[i]), slurp(f2[i])) << f1[i];
  }
  EXPECT_EQ(read_weights(d1 / "fixed_weights.ancw"), read_weights(d1 / "fixed_weights.json"));
}
