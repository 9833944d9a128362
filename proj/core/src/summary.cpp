#include <string>

#include <json.hpp>

#include "anc/error.hpp"
#include "anc/experiment.hpp"

namespace anc {
namespace {

using nlohmann::json;

json level_json(const Level& l) {
  switch (l.kind) {
    case Level::Kind::Finite:
      return l.db;
    case Level::Kind::Unbounded:
      return "unbounded";
    case Level::Kind::Undefined:
      break;
  }
  return "undefined";
}

Level level_from(const json& j) {
  if (j.is_number()) return Level{Level::Kind::Finite, j.get<double>()};
  const auto s = j.get<std::string>();
  if (s == "unbounded") return Level{Level::Kind::Unbounded, 0.0};
  if (s == "undefined") return Level{Level::Kind::Undefined, 0.0};
  throw Error(ErrorKind::Format, "bad level value '" + s + "'");
}

}  // namespace

ScenarioSummary summarize(const ScenarioResult& r) {
  ScenarioSummary s;
  s.provenance = r.provenance;
  s.sample_rate_hz = r.sample_rate_hz;
  s.interval_s = r.interval_s;
  s.mu = r.mu;
  for (const auto& a : r.arms) {
    ArmSummary as;
    as.name = a.name;
    as.snr = a.snr;
    as.nr_per_interval = a.nr_per_interval;
    as.interval_disturbance_power = a.interval_disturbance_power;
    as.interval_error_power = a.interval_error_power;
    as.disturbance_power = a.disturbance_power;
    as.error_power = a.error_power;
    as.diverged = a.diverged;
    as.divergence_index = a.divergence_index;
    as.divergence_message = a.divergence_message;
    s.arms.push_back(std::move(as));
  }
  s.pretrain_samples = r.pretrain.samples;
  s.pretrain_converged = r.pretrain.converged;
  s.sysid = r.sysid;
  s.warnings = r.warnings;
  return s;
}

std::string summary_to_json(const ScenarioSummary& s) {
  json j;
  j["schema_version"] = s.schema_version;
  j["provenance"] = {{"config_hash", s.provenance.config_hash},
                     {"seed", s.provenance.seed},
                     {"version", s.provenance.version}};
  j["sample_rate_hz"] = s.sample_rate_hz;
  j["interval_s"] = s.interval_s;
  j["mu"] = s.mu;
  j["arms"] = json::array();
  for (const auto& a : s.arms) {
    json ja;
    ja["name"] = a.name;
    ja["snr_db"] = level_json(a.snr);
    ja["final_nr_db"] = a.nr_per_interval.empty() ? json(nullptr) : level_json(a.nr_per_interval.back());
    ja["nr_per_interval_db"] = json::array();
    for (const auto& l : a.nr_per_interval) ja["nr_per_interval_db"].push_back(level_json(l));
    ja["interval_disturbance_power"] = a.interval_disturbance_power;
    ja["interval_error_power"] = a.interval_error_power;
    ja["disturbance_power"] = a.disturbance_power;
    ja["error_power"] = a.error_power;
    ja["diverged"] = a.diverged;
    ja["divergence_index"] = a.divergence_index ? json(*a.divergence_index) : json(nullptr);
    ja["divergence_message"] = a.divergence_message;
    j["arms"].push_back(std::move(ja));
  }
  j["pretrain"] = {{"samples", s.pretrain_samples}, {"converged", s.pretrain_converged}};
  j["sysid"] = json::array();
  for (const auto& r : s.sysid) {
    j["sysid"].push_back({{"source", r.source},
                          {"mic", r.mic},
                          {"misalignment_db", r.misalignment_db ? json(*r.misalignment_db) : json(nullptr)},
                          {"undermodeled", r.undermodeled}});
  }
  j["warnings"] = s.warnings;
  return j.dump(2) + "\n";
}

ScenarioSummary summary_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ScenarioSummary s;
    s.schema_version = j.at("schema_version").get<int>();
    if (s.schema_version != kSummarySchemaVersion) {
      throw Error(ErrorKind::Format, "unsupported summary schema_version " + std::to_string(s.schema_version));
    }
    const auto& p = j.at("provenance");
    s.provenance.config_hash = p.at("config_hash").get<std::string>();
    s.provenance.seed = p.at("seed").get<std::uint64_t>();
    s.provenance.version = p.at("version").get<std::string>();
    s.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    s.interval_s = j.at("interval_s").get<double>();
    s.mu = j.at("mu").get<double>();
    for (const auto& ja : j.at("arms")) {
      ArmSummary a;
      a.name = ja.at("name").get<std::string>();
      a.snr = level_from(ja.at("snr_db"));
      for (const auto& l : ja.at("nr_per_interval_db")) a.nr_per_interval.push_back(level_from(l));
      a.interval_disturbance_power = ja.at("interval_disturbance_power").get<std::vector<double>>();
      a.interval_error_power = ja.at("interval_error_power").get<std::vector<double>>();
      a.disturbance_power = ja.at("disturbance_power").get<double>();
      a.error_power = ja.at("error_power").get<double>();
      a.diverged = ja.at("diverged").get<bool>();
      if (!ja.at("divergence_index").is_null()) a.divergence_index = ja.at("divergence_index").get<std::size_t>();
      a.divergence_message = ja.at("divergence_message").get<std::string>();
      s.arms.push_back(std::move(a));
    }
    s.pretrain_samples = j.at("pretrain").at("samples").get<std::size_t>();
    s.pretrain_converged = j.at("pretrain").at("converged").get<bool>();
    for (const auto& jr : j.at("sysid")) {
      SysidReport r;
      r.source = jr.at("source").get<std::size_t>();
      r.mic = jr.at("mic").get<std::size_t>();
      if (!jr.at("misalignment_db").is_null()) r.misalignment_db = jr.at("misalignment_db").get<double>();
      r.undermodeled = jr.at("undermodeled").get<bool>();
      s.sysid.push_back(r);
    }
    s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return s;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Format, std::string("malformed summary JSON: ") + ex.what());
  }
}

}  // namespace anc
