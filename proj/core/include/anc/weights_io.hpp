#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace anc {

/// Controller weights together with the secondary-path estimates they were
/// trained against. Single-channel sets have I = J = K = 1.
///
/// Binary layout (little-endian):
///   "ANCW" | u32 version=1 | u32 layout (1 single, 2 grid)
///   single: u32 N | u32 M
///   grid:   u32 I | u32 J | u32 K | u32 L | u32 M
///   f64 weights[I*J*L] ordered (i, j, l) | f64 estimates[J*K*M] ordered (j, k, m)
struct WeightSet {
  std::uint32_t references = 1;
  std::uint32_t sources = 1;
  std::uint32_t mics = 1;
  std::uint32_t taps = 0;
  std::uint32_t path_taps = 0;
  bool grid = false;
  std::vector<double> weights;
  std::vector<double> sec_estimates;

  static WeightSet single(std::vector<double> weights, std::vector<double> sec_estimate);
  void validate() const;
  friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

inline constexpr std::uint32_t kWeightFormatVersion = 1;

std::vector<std::uint8_t> encode_weights(const WeightSet& set);
WeightSet decode_weights(std::span<const std::uint8_t> bytes);

std::string weights_to_json(const WeightSet& set);
WeightSet weights_from_json(const std::string& text);

void write_weights(const std::filesystem::path& path, const WeightSet& set);
WeightSet read_weights(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> contents);
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace anc
