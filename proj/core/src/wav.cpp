#include "anc/wav.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "anc/error.hpp"
#include "anc/weights_io.hpp"

namespace anc {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t rd16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t rd32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void wr16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void wr32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
void wrtag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

bool tag_is(const std::uint8_t* p, const char* tag) { return std::memcmp(p, tag, 4) == 0; }

}  // namespace

std::int16_t to_pcm16(double x, bool* clipped) noexcept {
  double v = std::round(x * 32768.0);
  bool clip = false;
  if (v > 32767.0) {
    v = 32767.0;
    clip = true;
  } else if (v < -32768.0) {
    v = -32768.0;
    clip = true;
  }
  if (clipped) *clipped = clip;
  return static_cast<std::int16_t>(v);
}

Signal decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes.data(), "RIFF") || !tag_is(bytes.data() + 8, "WAVE")) {
    throw Error(ErrorKind::Format, "not a RIFF/WAVE stream");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = rd32(chunk + 4);
    if (size > bytes.size() - pos - 8) throw Error(ErrorKind::Format, "WAV chunk overruns the stream");
    if (tag_is(chunk, "fmt ")) {
      if (size < 16) throw Error(ErrorKind::Format, "WAV fmt chunk is too short");
      format = rd16(chunk + 8);
      channels = rd16(chunk + 10);
      rate = rd32(chunk + 12);
      block_align = rd16(chunk + 20);
      bits = rd16(chunk + 22);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorKind::Format, "WAV extensible fmt chunk is too short");
        format = rd16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (tag_is(chunk, "data")) {
      data = chunk + 8;
      data_size = size;
      break;
    }
    pos += 8 + size + (size & 1u);
  }
  if (!have_fmt) throw Error(ErrorKind::Format, "WAV stream has no fmt chunk");
  if (data == nullptr) throw Error(ErrorKind::Format, "WAV stream has no data chunk");
  if (channels != 1) {
    throw Error(ErrorKind::Unsupported, "WAV has " + std::to_string(channels) +
                                            " channels; only mono is supported (downmix or extract one channel first)");
  }
  if (rate == 0) throw Error(ErrorKind::Format, "WAV sample rate is zero");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw Error(ErrorKind::Unsupported, "unsupported WAV encoding (format " + std::to_string(format) + ", " +
                                            std::to_string(bits) + " bits); use 16-bit PCM or 32-bit float");
  }
  const std::size_t width = bits / 8;
  if (block_align != width) throw Error(ErrorKind::Format, "WAV block alignment does not match sample width");
  const std::size_t count = data_size / width;
  if (count == 0) throw Error(ErrorKind::Data, "WAV data chunk is empty");

  std::vector<double> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* p = data + i * width;
    if (pcm16) {
      samples[i] = static_cast<double>(static_cast<std::int16_t>(rd16(p))) / 32768.0;
    } else {
      samples[i] = static_cast<double>(std::bit_cast<float>(rd32(p)));
    }
  }
  return Signal(std::move(samples), static_cast<double>(rate));
}

std::vector<std::uint8_t> encode_wav(const Signal& signal, WavEncoding encoding, WavWriteStats* stats) {
  if (signal.empty()) throw Error(ErrorKind::Data, "refusing to write an empty WAV file");
  const double rate = signal.sample_rate_hz();
  if (rate != std::round(rate) || rate > 4294967295.0) {
    throw Error(ErrorKind::Domain, "WAV sample rate must be an integer number of Hz");
  }
  const bool pcm = encoding == WavEncoding::Pcm16;
  const std::uint16_t width = pcm ? 2 : 4;
  const auto data_size = static_cast<std::uint32_t>(signal.size() * width);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  wrtag(out, "RIFF");
  wr32(out, 36 + data_size);
  wrtag(out, "WAVE");
  wrtag(out, "fmt ");
  wr32(out, 16);
  wr16(out, pcm ? kFormatPcm : kFormatFloat);
  wr16(out, 1);
  wr32(out, static_cast<std::uint32_t>(rate));
  wr32(out, static_cast<std::uint32_t>(rate) * width);
  wr16(out, width);
  wr16(out, static_cast<std::uint16_t>(8 * width));
  wrtag(out, "data");
  wr32(out, data_size);
  WavWriteStats local;
  for (double x : signal.samples()) {
    if (pcm) {
      bool clipped = false;
      wr16(out, static_cast<std::uint16_t>(to_pcm16(x, &clipped)));
      if (clipped) ++local.clipped_samples;
    } else {
      wr32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
  }
  if (stats) *stats = local;
  return out;
}

Signal read_wav(const std::filesystem::path& path) { return decode_wav(read_file(path)); }

WavWriteStats write_wav(const std::filesystem::path& path, const Signal& signal, WavEncoding encoding) {
  WavWriteStats stats;
  const auto bytes = encode_wav(signal, encoding, &stats);
  write_file_atomic(path, bytes);
  return stats;
}

}  // namespace anc
