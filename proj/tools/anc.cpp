// anc: command-line front end for the noise-control experiments.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "anc/error.hpp"
#include "anc/experiment.hpp"
#include "anc/mcanc.hpp"
#include "anc/report.hpp"
#include "anc/sysid.hpp"
#include "anc/wav.hpp"
#include "anc/weights_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kDiverged = 3, kIo = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

CLI::Option* add_common(CLI::App* cmd, Common& c, bool need_config = true) {
  auto* opt = cmd->add_option("--config,-c", c.config, "experiment config (JSON)");
  if (need_config) opt->required();
  opt->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "override the config seed");
  return cmd->add_option("--out,-o", c.out, "output directory")->capture_default_str();
}

anc::ExperimentConfig load(const Common& c) {
  auto cfg = anc::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw anc::Error(anc::ErrorKind::Io, "cannot create " + p.string() + ": " + ec.message());
}

std::string fmt_level(const anc::Level& l) {
  if (!l.finite()) return anc::to_string(l);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", l.db);
  return buf;
}

void print_summary(const anc::ScenarioSummary& s) {
  std::printf("config %s  seed %llu  version %s\n", s.provenance.config_hash.c_str(),
              static_cast<unsigned long long>(s.provenance.seed), s.provenance.version.c_str());
  const char* pre = s.pretrain_converged ? "converged" : "stopped at max duration";
  for (const auto& a : s.arms) {
    if (a.name == "fixed" && a.divergence_message.rfind("pre-training", 0) == 0) pre = "diverged";
  }
  std::printf("mu %.6g  pretrain %zu samples (%s)\n", s.mu, s.pretrain_samples, pre);
  std::printf("%-13s %10s %10s %12s  %s\n", "arm", "SNR dB", "NR[0] dB", "NR[last] dB", "status");
  for (const auto& a : s.arms) {
    const std::string first = a.nr_per_interval.empty() ? "-" : fmt_level(a.nr_per_interval.front());
    const std::string last = a.nr_per_interval.empty() ? "-" : fmt_level(a.nr_per_interval.back());
    const std::string status = a.diverged ? "DIVERGED at sample " + std::to_string(a.divergence_index.value_or(0)) : "ok";
    std::printf("%-13s %10s %10s %12s  %s\n", a.name.c_str(), fmt_level(a.snr).c_str(), first.c_str(), last.c_str(),
                status.c_str());
  }
  for (const auto& w : s.warnings) std::printf("warning: %s\n", w.c_str());
}

int cmd_synth(const Common& c) {
  const auto cfg = load(c);
  make_dir(c.out);
  const auto sig = anc::synthesize_scenario(cfg);
  // float WAV keeps the samples exact; unit-power noise would clip as PCM
  for (std::size_t s = 0; s < sig.sources.size(); ++s) {
    const auto& name = cfg.noise_sources[s].name;
    const fs::path p = fs::path(c.out) / ((name.empty() ? "source" + std::to_string(s) : name) + ".wav");
    anc::write_wav(p, sig.sources[s], anc::WavEncoding::Float32);
    std::printf("wrote %s\n", p.c_str());
  }
  const fs::path ref = fs::path(c.out) / "reference.wav";
  anc::write_wav(ref, sig.composition.reference, anc::WavEncoding::Float32);
  std::printf("wrote %s (%zu samples)\n", ref.c_str(), sig.composition.reference.size());
  return kOk;
}

int cmd_identify(const Common& c) {
  auto cfg = load(c);
  cfg.sysid.mode = anc::SysidSpec::Mode::Identify;
  make_dir(c.out);
  const auto plant = anc::build_plant(cfg);
  const auto est = anc::estimate_secondary_paths(cfg, plant);
  json j = json::array();
  std::printf("%-6s %-4s %16s  %s\n", "source", "mic", "misalignment dB", "note");
  for (std::size_t q = 0; q < est.reports.size(); ++q) {
    const auto& r = est.reports[q];
    const auto& f = est.estimates[r.source][r.mic];
    j.push_back({{"source", r.source},
                 {"mic", r.mic},
                 {"misalignment_db", r.misalignment_db ? json(*r.misalignment_db) : json(nullptr)},
                 {"undermodeled", r.undermodeled},
                 {"truth", plant.secondary_path(r.source, r.mic).weights()},
                 {"estimate", f.weights()}});
    std::printf("%-6zu %-4zu %16s  %s\n", r.source, r.mic,
                r.misalignment_db ? std::to_string(*r.misalignment_db).c_str() : "undefined",
                r.undermodeled ? "undermodeled: >1% of path energy beyond the estimate length" : "");
  }
  const fs::path p = fs::path(c.out) / "sysid.json";
  anc::write_file_atomic(p, j.dump(2) + "\n");
  std::printf("wrote %s\n", p.c_str());
  return kOk;
}

int cmd_pretrain(const Common& c) {
  const auto cfg = load(c);
  make_dir(c.out);
  const auto plant = anc::build_plant(cfg);
  const auto est = anc::estimate_secondary_paths(cfg, plant);
  const auto pre = anc::pretrain_fixed_filter(cfg, plant, est);
  const fs::path bin = fs::path(c.out) / "fixed_weights.ancw";
  anc::write_weights(bin, pre.weights);
  anc::write_file_atomic(fs::path(c.out) / "fixed_weights.json", anc::weights_to_json(pre.weights));
  std::printf("pre-trained %zu samples at mu %.6g (%s)\n", pre.report.samples, pre.report.mu,
              pre.report.converged ? "converged" : "stopped at max duration");
  if (!pre.report.nr_per_interval.empty()) {
    std::printf("last-interval NR %s dB\n", fmt_level(pre.report.nr_per_interval.back()).c_str());
  }
  std::printf("wrote %s\n", bin.c_str());
  return kOk;
}

int run_and_export(const Common& c, bool parallel, const std::string& fixed_path) {
  const auto cfg = load(c);
  anc::ScenarioOptions opts;
  opts.parallel_arms = parallel;
  if (!fixed_path.empty()) opts.fixed_weights = anc::read_weights(fixed_path);
  const auto result = anc::run_scenario(cfg, opts);
  const auto files = anc::export_report(result, c.out, cfg.metrics.decimation);
  print_summary(anc::summarize(result));
  std::printf("wrote %zu files to %s\n", files.size(), c.out.c_str());
  if (result.any_diverged()) {
    for (const auto& a : result.arms) {
      if (a.diverged) std::fprintf(stderr, "error: arm %s diverged: %s\n", a.name.c_str(), a.divergence_message.c_str());
    }
    return kDiverged;
  }
  return kOk;
}

int cmd_report(const Common& c, bool parallel) {
  if (!c.config.empty()) return run_and_export(c, parallel, {});
  const fs::path p = fs::path(c.out) / "summary.json";
  const auto bytes = anc::read_file(p);
  const auto s = anc::summary_from_json(std::string(bytes.begin(), bytes.end()));
  print_summary(s);
  for (const auto& a : s.arms) {
    std::printf("\n%s NR per interval (dB):", a.name.c_str());
    for (std::size_t q = 0; q < a.nr_per_interval.size(); ++q) {
      std::printf("%s%s", q % 10 == 0 ? "\n  " : " ", fmt_level(a.nr_per_interval[q]).c_str());
    }
    std::printf("\n");
  }
  for (const auto& a : s.arms) {
    if (a.diverged) return kDiverged;
  }
  return kOk;
}

struct MacArgs {
  std::size_t i = 1, j = 1, k = 1, l = 128, m = 64;
  std::size_t samples = 100;
  bool grid = false;
};

int cmd_mac(const Common& c, MacArgs a, bool write_csv) {
  if (!c.config.empty()) {
    const auto cfg = load(c);
    a.i = 1;
    a.j = cfg.plant.sources;
    a.k = cfg.plant.mics;
    a.l = cfg.controller.taps;
    a.m = cfg.sysid.taps;
  }
  std::vector<anc::ChannelConfig> rows;
  if (a.grid) {
    for (std::size_t n = 1; n <= 4; ++n) rows.push_back({n, n, n, a.l, a.m});
  } else {
    rows.push_back({a.i, a.j, a.k, a.l, a.m});
  }
  std::string csv = "I,J,K,L,M,control_output,filtered_reference,weight_update,total,measured\n";
  std::printf("%3s %3s %3s %5s %5s %12s %12s %12s %12s %12s\n", "I", "J", "K", "L", "M", "output", "filtered-x",
              "update", "total", "measured");
  for (const auto& r : rows) {
    r.validate();
    const auto b = anc::mac_count(r);
    const auto meas = anc::mac_measure(r, a.samples);
    std::printf("%3zu %3zu %3zu %5zu %5zu %12llu %12llu %12llu %12llu %12llu\n", r.references, r.sources, r.mics,
                r.taps, r.path_taps, static_cast<unsigned long long>(b.control_output),
                static_cast<unsigned long long>(b.filtered_reference), static_cast<unsigned long long>(b.weight_update),
                static_cast<unsigned long long>(b.total()), static_cast<unsigned long long>(meas.per_sample));
    csv += std::to_string(r.references) + ',' + std::to_string(r.sources) + ',' + std::to_string(r.mics) + ',' +
           std::to_string(r.taps) + ',' + std::to_string(r.path_taps) + ',' + std::to_string(b.control_output) + ',' +
           std::to_string(b.filtered_reference) + ',' + std::to_string(b.weight_update) + ',' +
           std::to_string(b.total()) + ',' + std::to_string(meas.per_sample) + '\n';
  }
  if (write_csv) {
    make_dir(c.out);
    const fs::path p = fs::path(c.out) / "mac.csv";
    anc::write_file_atomic(p, csv);
    std::printf("wrote %s\n", p.c_str());
  }
  return kOk;
}

int exit_for(const anc::Error& e) {
  switch (e.kind()) {
    case anc::ErrorKind::Config:
      return kConfig;
    case anc::ErrorKind::Divergence:
      return kDiverged;
    case anc::ErrorKind::Io:
    case anc::ErrorKind::Format:
    case anc::ErrorKind::Unsupported:
      return kIo;
    default:
      return kOther;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active noise control experiments: FxLMS vs a pre-trained fixed filter"};
  app.set_version_flag("--version", std::string(anc::version_string()));
  app.require_subcommand(1);

  Common synth_c, ident_c, pre_c, run_c, rep_c, mac_c;
  auto* synth = app.add_subcommand("synth", "write the synthesized noise sources and reference as WAV");
  add_common(synth, synth_c);
  auto* ident = app.add_subcommand("identify", "identify the secondary paths offline");
  add_common(ident, ident_c);
  auto* pre = app.add_subcommand("pretrain", "pre-train and save the fixed control filter");
  add_common(pre, pre_c);

  auto* run = app.add_subcommand("run", "run all arms and export CSV/JSON results");
  add_common(run, run_c);
  bool run_parallel = false;
  std::string fixed_path;
  run->add_flag("--parallel-arms", run_parallel, "run the controlled arms concurrently");
  run->add_option("--fixed-weights", fixed_path, "use saved fixed-filter weights instead of pre-training")
      ->check(CLI::ExistingFile);

  auto* rep = app.add_subcommand("report", "print a saved summary, or run and export when --config is given");
  add_common(rep, rep_c, false);
  bool rep_parallel = false;
  rep->add_flag("--parallel-arms", rep_parallel, "run the controlled arms concurrently");

  auto* mac = app.add_subcommand("mac", "multiply-accumulate counts per sample");
  auto* mac_out = add_common(mac, mac_c, false);
  MacArgs ma;
  mac->add_option("-I,--references", ma.i)->capture_default_str();
  mac->add_option("-J,--sources", ma.j)->capture_default_str();
  mac->add_option("-K,--mics", ma.k)->capture_default_str();
  mac->add_option("-L,--taps", ma.l)->capture_default_str();
  mac->add_option("-M,--path-taps", ma.m)->capture_default_str();
  mac->add_option("--samples", ma.samples, "samples for the instrumented measurement")->capture_default_str();
  mac->add_flag("--square", ma.grid, "table for I = J = K = 1..4");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*synth) return cmd_synth(synth_c);
    if (*ident) return cmd_identify(ident_c);
    if (*pre) return cmd_pretrain(pre_c);
    if (*run) return run_and_export(run_c, run_parallel, fixed_path);
    if (*rep) return cmd_report(rep_c, rep_parallel);
    if (*mac) return cmd_mac(mac_c, ma, mac_out->count() > 0);
  } catch (const anc::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", anc::to_string(e.kind()), e.what());
    return exit_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kOther;
  }
  return kOther;
}
