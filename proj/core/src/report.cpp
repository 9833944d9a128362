#include "anc/report.hpp"

#include <cstdio>
#include <string>

#include "anc/error.hpp"
#include "anc/weights_io.hpp"

namespace anc {
namespace {

// %.17g round-trips every double and prints identically run to run.
void put(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void put(std::string& out, std::size_t v) { out += std::to_string(v); }

const char* status(const Level& l) {
  switch (l.kind) {
    case Level::Kind::Finite:
      return "finite";
    case Level::Kind::Unbounded:
      return "unbounded";
    case Level::Kind::Undefined:
      break;
  }
  return "undefined";
}

}  // namespace

std::vector<std::filesystem::path> export_report(const ScenarioResult& result, const std::filesystem::path& out_dir,
                                                 std::size_t decimation) {
  if (decimation == 0) throw Error(ErrorKind::Domain, "decimation must be at least 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& name, const std::string& text) {
    const auto path = out_dir / name;
    write_file_atomic(path, text);
    written.push_back(path);
  };
  const double fs = result.sample_rate_hz > 0.0 ? result.sample_rate_hz : 1.0;

  for (const auto& arm : result.arms) {
    std::string ts = "sample,time_s,mic,disturbance,error\n";
    const std::size_t len = arm.error.empty() ? 0 : arm.error[0].size();
    for (std::size_t i = 0; i < len; i += decimation) {
      for (std::size_t k = 0; k < arm.error.size(); ++k) {
        put(ts, i);
        ts += ',';
        put(ts, static_cast<double>(i) / fs);
        ts += ',';
        put(ts, k);
        ts += ',';
        put(ts, k < arm.disturbance.size() && i < arm.disturbance[k].size() ? arm.disturbance[k][i] : 0.0);
        ts += ',';
        put(ts, arm.error[k][i]);
        ts += '\n';
      }
    }
    emit(arm.name + "_timeseries.csv", ts);

    std::string nr = "interval,start_s,end_s,status,nr_db\n";
    for (std::size_t q = 0; q < arm.nr_per_interval.size(); ++q) {
      const auto& l = arm.nr_per_interval[q];
      put(nr, q);
      nr += ',';
      put(nr, static_cast<double>(q) * result.interval_s);
      nr += ',';
      put(nr, static_cast<double>(q + 1) * result.interval_s);
      nr += ',';
      nr += status(l);
      nr += ',';
      if (l.finite()) put(nr, l.db);
      nr += '\n';
    }
    emit(arm.name + "_nr.csv", nr);

    std::string psd = "freq_hz,power,power_db\n";
    for (std::size_t b = 0; b < arm.psd.freq_hz.size(); ++b) {
      put(psd, arm.psd.freq_hz[b]);
      psd += ',';
      put(psd, arm.psd.power[b]);
      psd += ',';
      put(psd, arm.psd.power_db[b]);
      psd += '\n';
    }
    emit(arm.name + "_psd.csv", psd);

    std::string sg = "frame,time_s,freq_hz,power_db\n";
    for (std::size_t f = 0; f < arm.spectrogram.power_db.size(); ++f) {
      for (std::size_t b = 0; b < arm.spectrogram.freq_hz.size(); ++b) {
        put(sg, f);
        sg += ',';
        put(sg, arm.spectrogram.frame_time_s[f]);
        sg += ',';
        put(sg, arm.spectrogram.freq_hz[b]);
        sg += ',';
        put(sg, arm.spectrogram.power_db[f][b]);
        sg += '\n';
      }
    }
    emit(arm.name + "_spectrogram.csv", sg);
  }

  std::string tr = "sample,mse,msd\n";
  const auto& t = result.adaptive_trace;
  for (std::size_t q = 0; q < t.mse.size(); ++q) {
    put(tr, (q + 1) * t.decimation);
    tr += ',';
    put(tr, t.mse[q]);
    tr += ',';
    if (q < t.msd.size()) put(tr, t.msd[q]);
    tr += '\n';
  }
  emit("adaptive_trace.csv", tr);

  emit("summary.json", summary_to_json(summarize(result)));

  const auto weights = [&](const std::string& stem, const WeightSet& w) {
    if (w.weights.empty()) return;
    const auto bin = out_dir / (stem + ".ancw");
    write_weights(bin, w);
    written.push_back(bin);
    emit(stem + ".json", weights_to_json(w));
  };
  weights("adaptive_weights", result.adaptive_weights);
  weights("fixed_weights", result.fixed_weights);
  return written;
}

}  // namespace anc
