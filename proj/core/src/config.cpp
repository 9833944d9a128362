#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "anc/error.hpp"
#include "anc/experiment.hpp"

namespace anc {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw Error(ErrorKind::Config, where + ": " + msg);
}

/// Object view that remembers which keys were read and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& at(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(where_, std::string("missing key '") + key + "'");
    return j_.at(key);
  }

  template <typename T>
  T get(const char* key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return as<T>(j_.at(key), key);
  }

  template <typename T>
  T require(const char* key) {
    return as<T>(at(key), key);
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) fail(where_, "unknown key '" + key + "'");
    }
  }

 private:
  template <typename T>
  T as(const json& v, const char* key) const {
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
          fail(where_, std::string("'") + key + "' must be a non-negative integer");
        }
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) fail(where_, std::string("'") + key + "' must be a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(where_, std::string("'") + key + "' must be a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(where_, std::string("'") + key + "' must be a string");
      }
      return v.get<T>();
    } catch (const json::exception& ex) {
      fail(where_, std::string("bad value for '") + key + "': " + ex.what());
    }
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(where, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

PathSpec parse_path(const json& v, const std::string& where, const SyntheticPath& fallback) {
  PathSpec spec;
  spec.synthetic = fallback;
  if (v.is_string()) {
    if (v.get<std::string>() != "default") fail(where, "path must be \"default\", {taps}, or {synthetic}");
    return spec;
  }
  Section s(v, where);
  if (s.has("taps") == s.has("synthetic")) fail(where, "give exactly one of 'taps' or 'synthetic'");
  if (s.has("taps")) {
    spec.taps = number_list(s.at("taps"), s.path("taps"));
    if (spec.taps->empty()) fail(where, "taps must not be empty");
    for (double t : *spec.taps) {
      if (!std::isfinite(t)) fail(where, "taps must be finite");
    }
  } else {
    Section g(s.at("synthetic"), s.path("synthetic"));
    spec.synthetic.delay = g.get<std::size_t>("delay", fallback.delay);
    spec.synthetic.gain = g.get<double>("gain", fallback.gain);
    spec.synthetic.decay = g.get<double>("decay", fallback.decay);
    spec.synthetic.length = g.get<std::size_t>("length", fallback.length);
    spec.synthetic.perturbation = g.get<double>("perturbation", fallback.perturbation);
    g.finish();
    if (spec.synthetic.delay >= spec.synthetic.length) fail(where, "synthetic delay must be below its length");
    if (!(spec.synthetic.perturbation >= 0.0 && spec.synthetic.perturbation < 1.0)) {
      fail(where, "perturbation must lie in [0, 1)");
    }
  }
  s.finish();
  return spec;
}

NoiseSourceSpec parse_source(const json& v, const std::string& where, const std::filesystem::path& base_dir,
                             double fs) {
  Section s(v, where);
  NoiseSourceSpec src;
  src.name = s.get<std::string>("name", "");
  const auto kind = s.require<std::string>("kind");
  const double nyquist = fs / 2.0;
  if (kind == "tone") {
    src.kind = NoiseSourceSpec::Kind::Tone;
    src.freq_hz = s.require<double>("freq_hz");
    src.amplitude = s.get<double>("amplitude", 1.0);
    if (!(src.freq_hz > 0.0 && src.freq_hz < nyquist)) fail(where, "tone frequency must lie in (0, Nyquist)");
  } else if (kind == "band_noise") {
    src.kind = NoiseSourceSpec::Kind::BandNoise;
    src.low_hz = s.require<double>("low_hz");
    src.high_hz = s.require<double>("high_hz");
    src.clip_to_nyquist = s.get<bool>("clip_to_nyquist", false);
    src.filter_taps = s.get<std::size_t>("filter_taps", 0);
    if (s.has("tones")) {
      const auto& tones = s.at("tones");
      if (!tones.is_array()) fail(s.path("tones"), "expected an array");
      for (std::size_t i = 0; i < tones.size(); ++i) {
        Section t(tones[i], s.path("tones") + "[" + std::to_string(i) + "]");
        ToneSpec tone;
        tone.freq_hz = t.require<double>("freq_hz");
        tone.amplitude = t.get<double>("amplitude", 1.0);
        tone.phase = t.get<double>("phase", 0.0);
        t.finish();
        if (!(tone.freq_hz > 0.0 && tone.freq_hz < nyquist)) fail(where, "tone frequency must lie in (0, Nyquist)");
        src.tones.push_back(tone);
      }
    }
    if (!(src.low_hz >= 0.0 && src.low_hz < src.high_hz)) fail(where, "band needs 0 <= low_hz < high_hz");
    if (src.high_hz >= nyquist && !src.clip_to_nyquist) {
      fail(where, "band edge " + std::to_string(src.high_hz) + " Hz is not below Nyquist (" + std::to_string(nyquist) +
                      " Hz); set clip_to_nyquist to cap it");
    }
    if (src.low_hz >= 0.95 * nyquist) fail(where, "band lies above the usable range");
  } else if (kind == "wav") {
    src.kind = NoiseSourceSpec::Kind::Wav;
    std::filesystem::path p = s.require<std::string>("path");
    src.path = p.is_absolute() ? p : base_dir / p;
    if (!std::filesystem::exists(src.path)) fail(where, "file does not exist: " + src.path.string());
  } else {
    fail(where, "unknown source kind '" + kind + "' (wav, tone, band_noise)");
  }
  if (s.has("primary_path")) src.primary_path = parse_path(s.at("primary_path"), s.path("primary_path"), default_primary_path());
  s.finish();
  return src;
}

}  // namespace

std::size_t ExperimentConfig::total_samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + ex.what());
  }
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.canonical = root.dump();
  Section s(root, "config");
  cfg.schema_version = s.require<int>("schema_version");
  if (cfg.schema_version != kConfigSchemaVersion) {
    fail("config", "unsupported schema_version " + std::to_string(cfg.schema_version));
  }
  cfg.sample_rate_hz = s.get<double>("sample_rate_hz", cfg.sample_rate_hz);
  cfg.duration_s = s.get<double>("duration_s", cfg.duration_s);
  cfg.seed = s.get<std::uint64_t>("seed", cfg.seed);
  if (!(cfg.sample_rate_hz > 0.0) || cfg.sample_rate_hz != std::round(cfg.sample_rate_hz)) {
    fail("config", "sample_rate_hz must be a positive integer");
  }
  if (!(cfg.duration_s > 0.0)) fail("config", "duration_s must be positive");

  const auto& sources = s.at("noise_sources");
  if (!sources.is_array() || sources.empty()) fail("config.noise_sources", "expected a nonempty array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    cfg.noise_sources.push_back(
        parse_source(sources[i], "config.noise_sources[" + std::to_string(i) + "]", base_dir, cfg.sample_rate_hz));
  }

  if (s.has("composition")) {
    Section c(s.at("composition"), "config.composition");
    const auto mode = c.get<std::string>("mode", "concatenate");
    if (mode == "concatenate") {
      cfg.composition.mode = CompositionSpec::Mode::Concatenate;
    } else if (mode == "mix") {
      cfg.composition.mode = CompositionSpec::Mode::Mix;
    } else {
      fail("config.composition", "mode must be concatenate or mix");
    }
    if (c.has("switch_times_s")) cfg.composition.switch_times_s = number_list(c.at("switch_times_s"), c.path("switch_times_s"));
    if (c.has("gains")) cfg.composition.gains = number_list(c.at("gains"), c.path("gains"));
    c.finish();
  }
  const std::size_t n_sources = cfg.noise_sources.size();
  if (!cfg.composition.gains.empty() && cfg.composition.gains.size() != n_sources) {
    fail("config.composition", "gains must list one value per noise source");
  }
  if (cfg.composition.mode == CompositionSpec::Mode::Concatenate) {
    const auto& st = cfg.composition.switch_times_s;
    if (st.size() + 1 != n_sources) fail("config.composition", "concatenate needs one switch time between each pair of sources");
    double prev = 0.0;
    for (double t : st) {
      if (!(t > prev && t < cfg.duration_s)) fail("config.composition", "switch times must increase strictly within (0, duration)");
      prev = t;
    }
  } else if (!cfg.composition.switch_times_s.empty()) {
    fail("config.composition", "switch_times_s only applies to concatenate");
  }

  if (s.has("plant")) {
    Section p(s.at("plant"), "config.plant");
    cfg.plant.primary.synthetic = default_primary_path();
    cfg.plant.secondary.synthetic = default_secondary_path();
    if (p.has("primary")) cfg.plant.primary = parse_path(p.at("primary"), p.path("primary"), default_primary_path());
    if (p.has("secondary")) cfg.plant.secondary = parse_path(p.at("secondary"), p.path("secondary"), default_secondary_path());
    cfg.plant.sources = p.get<std::size_t>("sources", 1);
    cfg.plant.mics = p.get<std::size_t>("mics", 1);
    cfg.plant.measurement_noise_std = p.get<double>("measurement_noise_std", 0.0);
    p.finish();
    if (cfg.plant.sources == 0 || cfg.plant.mics == 0) fail("config.plant", "sources and mics must be at least 1");
    if (!(cfg.plant.measurement_noise_std >= 0.0)) fail("config.plant", "measurement_noise_std must be >= 0");
  } else {
    cfg.plant.primary.synthetic = default_primary_path();
    cfg.plant.secondary.synthetic = default_secondary_path();
  }

  if (s.has("controller")) {
    Section c(s.at("controller"), "config.controller");
    const auto type = c.get<std::string>("type", "single");
    if (type == "single") {
      cfg.controller.type = ControllerSpec::Type::Single;
    } else if (type == "multichannel") {
      cfg.controller.type = ControllerSpec::Type::Multichannel;
    } else {
      fail("config.controller", "type must be single or multichannel");
    }
    const auto ref = c.get<std::string>("reference", "composite");
    if (ref == "composite") {
      cfg.controller.reference = ControllerSpec::Reference::Composite;
    } else if (ref == "per_source") {
      cfg.controller.reference = ControllerSpec::Reference::PerSource;
    } else {
      fail("config.controller", "reference must be composite or per_source");
    }
    cfg.controller.taps = c.get<std::size_t>("taps", cfg.controller.taps);
    if (c.has("mu")) {
      const auto& mu = c.at("mu");
      if (mu.is_string() && mu.get<std::string>() == "auto") {
        cfg.controller.mu.reset();
      } else if (mu.is_number() && mu.get<double>() >= 0.0) {
        cfg.controller.mu = mu.get<double>();
      } else {
        fail("config.controller", "mu must be \"auto\" or a non-negative number");
      }
    }
    cfg.controller.mu_scale = c.get<double>("mu_scale", cfg.controller.mu_scale);
    c.finish();
    if (cfg.controller.taps == 0) fail("config.controller", "taps must be at least 1");
    if (!(cfg.controller.mu_scale > 0.0)) fail("config.controller", "mu_scale must be positive");
  }
  if (cfg.controller.type == ControllerSpec::Type::Single &&
      cfg.controller.reference == ControllerSpec::Reference::PerSource) {
    fail("config.controller", "per_source references need the multichannel controller");
  }
  if (cfg.controller.type == ControllerSpec::Type::Single && (cfg.plant.sources != 1 || cfg.plant.mics != 1)) {
    fail("config.controller", "a single-channel controller needs a plant with one source and one mic");
  }

  if (s.has("sysid")) {
    Section c(s.at("sysid"), "config.sysid");
    const auto mode = c.get<std::string>("mode", "exact");
    if (mode == "exact") {
      cfg.sysid.mode = SysidSpec::Mode::Exact;
    } else if (mode == "identify") {
      cfg.sysid.mode = SysidSpec::Mode::Identify;
    } else {
      fail("config.sysid", "mode must be exact or identify");
    }
    cfg.sysid.taps = c.get<std::size_t>("taps", cfg.sysid.taps);
    cfg.sysid.mu = c.get<double>("mu", cfg.sysid.mu);
    cfg.sysid.samples = c.get<std::size_t>("samples", cfg.sysid.samples);
    cfg.sysid.mismatch = c.get<double>("mismatch", cfg.sysid.mismatch);
    c.finish();
    if (cfg.sysid.taps == 0 || cfg.sysid.samples == 0) fail("config.sysid", "taps and samples must be at least 1");
    if (!(cfg.sysid.mu > 0.0)) fail("config.sysid", "mu must be positive");
    if (!(cfg.sysid.mismatch >= 0.0 && cfg.sysid.mismatch < 1.0)) fail("config.sysid", "mismatch must lie in [0, 1)");
  }

  if (s.has("fixed_filter")) {
    Section c(s.at("fixed_filter"), "config.fixed_filter");
    cfg.fixed.train_source = c.get<std::size_t>("train_source", cfg.fixed.train_source);
    cfg.fixed.min_improvement_db = c.get<double>("min_improvement_db", cfg.fixed.min_improvement_db);
    cfg.fixed.min_duration_s = c.get<double>("min_duration_s", cfg.fixed.min_duration_s);
    cfg.fixed.max_duration_s = c.get<double>("max_duration_s", cfg.fixed.max_duration_s);
    c.finish();
  }
  if (cfg.fixed.train_source >= n_sources) fail("config.fixed_filter", "train_source indexes past noise_sources");
  if (!(cfg.fixed.max_duration_s > 0.0 && cfg.fixed.min_duration_s <= cfg.fixed.max_duration_s)) {
    fail("config.fixed_filter", "need 0 < min_duration_s <= max_duration_s");
  }

  if (s.has("metrics")) {
    Section c(s.at("metrics"), "config.metrics");
    cfg.metrics.interval_s = c.get<double>("interval_s", cfg.metrics.interval_s);
    cfg.metrics.psd_segment = c.get<std::size_t>("psd_segment", cfg.metrics.psd_segment);
    cfg.metrics.psd_overlap = c.get<double>("psd_overlap", cfg.metrics.psd_overlap);
    cfg.metrics.stft_frame = c.get<std::size_t>("stft_frame", cfg.metrics.stft_frame);
    cfg.metrics.stft_hop = c.get<std::size_t>("stft_hop", cfg.metrics.stft_hop);
    cfg.metrics.decimation = c.get<std::size_t>("decimation", cfg.metrics.decimation);
    cfg.metrics.trace_decimation = c.get<std::size_t>("trace_decimation", cfg.metrics.trace_decimation);
    c.finish();
  }
  const auto pow2 = [](std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; };
  if (!(cfg.metrics.interval_s > 0.0)) fail("config.metrics", "interval_s must be positive");
  if (!pow2(cfg.metrics.psd_segment) || !pow2(cfg.metrics.stft_frame)) {
    fail("config.metrics", "psd_segment and stft_frame must be powers of two");
  }
  if (!(cfg.metrics.psd_overlap >= 0.0 && cfg.metrics.psd_overlap < 1.0)) fail("config.metrics", "psd_overlap must lie in [0, 1)");
  if (cfg.metrics.stft_hop == 0 || cfg.metrics.stft_hop > cfg.metrics.stft_frame) {
    fail("config.metrics", "stft_hop must satisfy 0 < hop <= stft_frame");
  }
  if (cfg.metrics.decimation == 0 || cfg.metrics.trace_decimation == 0) fail("config.metrics", "decimation must be >= 1");
  s.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (unsigned char c : cfg.canonical) mix(c);
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>((cfg.seed >> (8 * i)) & 0xFF));
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace anc
