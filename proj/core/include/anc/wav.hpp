#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "anc/signal.hpp"

namespace anc {

enum class WavEncoding { Pcm16, Float32 };

struct WavWriteStats {
  std::size_t clipped_samples = 0;
};

/// Decodes a mono RIFF/WAVE stream: 16-bit PCM (scaled by 1/32768) or 32-bit
/// IEEE float. Throws Format for malformed headers, Unsupported for other
/// codecs or channel counts, Data for an empty data chunk.
Signal decode_wav(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_wav(const Signal& signal, WavEncoding encoding, WavWriteStats* stats = nullptr);

Signal read_wav(const std::filesystem::path& path);
WavWriteStats write_wav(const std::filesystem::path& path, const Signal& signal,
                        WavEncoding encoding = WavEncoding::Pcm16);

/// round-half-away-from-zero(x * 32768), clamped to [-32768, 32767].
std::int16_t to_pcm16(double x, bool* clipped = nullptr) noexcept;

}  // namespace anc
