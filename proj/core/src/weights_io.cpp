#include "anc/weights_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "anc/error.hpp"

namespace anc {
namespace {

constexpr std::uint32_t kLayoutSingle = 1;
constexpr std::uint32_t kLayoutGrid = 2;

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
void put64(std::vector<std::uint8_t>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorKind::Format, "weight file is truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

WeightSet WeightSet::single(std::vector<double> weights, std::vector<double> sec_estimate) {
  WeightSet s;
  s.taps = static_cast<std::uint32_t>(weights.size());
  s.path_taps = static_cast<std::uint32_t>(sec_estimate.size());
  s.weights = std::move(weights);
  s.sec_estimates = std::move(sec_estimate);
  return s;
}

void WeightSet::validate() const {
  if (references == 0 || sources == 0 || mics == 0 || taps == 0 || path_taps == 0) {
    throw Error(ErrorKind::Format, "weight set dimensions must be positive");
  }
  if (!grid && (references != 1 || sources != 1 || mics != 1)) {
    throw Error(ErrorKind::Format, "single-channel weight set must have I = J = K = 1");
  }
  const std::size_t nw = std::size_t{references} * sources * taps;
  const std::size_t ns = std::size_t{sources} * mics * path_taps;
  if (weights.size() != nw || sec_estimates.size() != ns) {
    throw Error(ErrorKind::Format, "weight set payload does not match its dimensions");
  }
  for (double v : weights) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Data, "weight set contains non-finite weights");
  }
  for (double v : sec_estimates) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Data, "weight set contains non-finite path estimates");
  }
}

std::vector<std::uint8_t> encode_weights(const WeightSet& set) {
  set.validate();
  std::vector<std::uint8_t> out{'A', 'N', 'C', 'W'};
  put32(out, kWeightFormatVersion);
  if (set.grid) {
    put32(out, kLayoutGrid);
    for (std::uint32_t v : {set.references, set.sources, set.mics, set.taps, set.path_taps}) put32(out, v);
  } else {
    put32(out, kLayoutSingle);
    put32(out, set.taps);
    put32(out, set.path_taps);
  }
  for (double v : set.weights) put64(out, v);
  for (double v : set.sec_estimates) put64(out, v);
  return out;
}

WeightSet decode_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes[0] != 'A' || bytes[1] != 'N' || bytes[2] != 'C' || bytes[3] != 'W') {
    throw Error(ErrorKind::Format, "not a weight file (bad magic)");
  }
  Reader r(bytes.subspan(4));
  const std::uint32_t version = r.u32();
  if (version != kWeightFormatVersion) {
    throw Error(ErrorKind::Unsupported, "weight file version " + std::to_string(version) + " is not supported");
  }
  WeightSet s;
  const std::uint32_t layout = r.u32();
  if (layout == kLayoutSingle) {
    s.taps = r.u32();
    s.path_taps = r.u32();
  } else if (layout == kLayoutGrid) {
    s.grid = true;
    s.references = r.u32();
    s.sources = r.u32();
    s.mics = r.u32();
    s.taps = r.u32();
    s.path_taps = r.u32();
  } else {
    throw Error(ErrorKind::Format, "unknown weight layout " + std::to_string(layout));
  }
  const std::size_t nw = std::size_t{s.references} * s.sources * s.taps;
  const std::size_t ns = std::size_t{s.sources} * s.mics * s.path_taps;
  if (nw > bytes.size() || ns > bytes.size()) throw Error(ErrorKind::Format, "weight file is truncated");
  s.weights.resize(nw);
  s.sec_estimates.resize(ns);
  for (double& v : s.weights) v = r.f64();
  for (double& v : s.sec_estimates) v = r.f64();
  if (!r.done()) throw Error(ErrorKind::Format, "trailing bytes after weight payload");
  s.validate();
  return s;
}

std::string weights_to_json(const WeightSet& set) {
  set.validate();
  nlohmann::ordered_json j;
  j["format"] = "anc-weights";
  j["version"] = kWeightFormatVersion;
  j["layout"] = set.grid ? "grid" : "single";
  j["I"] = set.references;
  j["J"] = set.sources;
  j["K"] = set.mics;
  j["L"] = set.taps;
  j["M"] = set.path_taps;
  j["weights"] = set.weights;
  j["sec_estimates"] = set.sec_estimates;
  return j.dump(2) + "\n";
}

WeightSet weights_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "anc-weights") throw Error(ErrorKind::Format, "not a weight JSON document");
    if (j.at("version").get<std::uint32_t>() != kWeightFormatVersion) {
      throw Error(ErrorKind::Unsupported, "unsupported weight JSON version");
    }
    WeightSet s;
    const auto layout = j.at("layout").get<std::string>();
    if (layout != "grid" && layout != "single") throw Error(ErrorKind::Format, "unknown weight layout " + layout);
    s.grid = layout == "grid";
    s.references = j.at("I").get<std::uint32_t>();
    s.sources = j.at("J").get<std::uint32_t>();
    s.mics = j.at("K").get<std::uint32_t>();
    s.taps = j.at("L").get<std::uint32_t>();
    s.path_taps = j.at("M").get<std::uint32_t>();
    s.weights = j.at("weights").get<std::vector<double>>();
    s.sec_estimates = j.at("sec_estimates").get<std::vector<double>>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::Format, std::string("malformed weight JSON: ") + ex.what());
  }
}

void write_weights(const std::filesystem::path& path, const WeightSet& set) {
  if (path.extension() == ".json") {
    write_file_atomic(path, weights_to_json(set));
  } else {
    write_file_atomic(path, encode_weights(set));
  }
}

WeightSet read_weights(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (path.extension() == ".json") return weights_from_json(std::string(bytes.begin(), bytes.end()));
  return decode_weights(bytes);
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(contents.data()), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(contents.data()),
                                                        contents.size()));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::Io, "failed reading " + path.string());
  return bytes;
}

}  // namespace anc
