#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "anc/error.hpp"
#include "anc/experiment.hpp"
#include "anc/wav.hpp"
#include "fft.hpp"

namespace anc {
namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Blackman-windowed sinc band-pass; low == 0 degenerates to a low-pass.
std::vector<double> band_pass(double low, double high, std::size_t taps) {
  std::vector<double> h(taps);
  const double c = 0.5 * static_cast<double>(taps - 1);
  for (std::size_t m = 0; m < taps; ++m) {
    const double t = static_cast<double>(m) - c;
    const double ph = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(taps - 1);
    const double w = 0.42 - 0.5 * std::cos(ph) + 0.08 * std::cos(2.0 * ph);
    h[m] = w * (2.0 * high * sinc(2.0 * high * t) - 2.0 * low * sinc(2.0 * low * t));
  }
  return h;
}

void normalize(std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  p /= static_cast<double>(x.empty() ? 1 : x.size());
  if (p <= 0.0) return;
  const double g = 1.0 / std::sqrt(p);
  for (double& v : x) v *= g;
}

}  // namespace

Signal synthesize_noise(const NoiseSourceSpec& spec, double fs, double duration_s, std::uint64_t seed) {
  if (!(fs > 0.0) || !(duration_s > 0.0)) throw Error(ErrorKind::Domain, "synthesis needs a positive rate and duration");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  const double nyquist = fs / 2.0;
  std::vector<double> out(n, 0.0);

  switch (spec.kind) {
    case NoiseSourceSpec::Kind::Tone: {
      if (!(spec.freq_hz > 0.0 && spec.freq_hz < nyquist)) throw Error(ErrorKind::Config, "tone frequency must lie below Nyquist");
      const double w = 2.0 * std::numbers::pi * spec.freq_hz / fs;
      for (std::size_t i = 0; i < n; ++i) out[i] = spec.amplitude * std::sin(w * static_cast<double>(i));
      return Signal(std::move(out), fs);
    }
    case NoiseSourceSpec::Kind::Wav: {
      Signal file = read_wav(spec.path);
      if (file.sample_rate_hz() != fs) {
        throw Error(ErrorKind::Config, spec.path.string() + ": sample rate " + std::to_string(file.sample_rate_hz()) +
                                           " Hz does not match the configured " + std::to_string(fs) + " Hz");
      }
      // shorter recordings loop
      const auto& s = file.samples();
      for (std::size_t i = 0; i < n; ++i) out[i] = s[i % s.size()];
      return Signal(std::move(out), fs);
    }
    case NoiseSourceSpec::Kind::BandNoise:
      break;
  }

  double high = spec.high_hz;
  if (high >= 0.95 * nyquist) {
    if (high >= nyquist && !spec.clip_to_nyquist) {
      throw Error(ErrorKind::Config, "band edge " + std::to_string(high) + " Hz is not below Nyquist");
    }
    high = std::min(high, 0.95 * nyquist);
  }
  if (!(spec.low_hz >= 0.0 && spec.low_hz < high)) throw Error(ErrorKind::Config, "band is empty after Nyquist capping");

  std::size_t taps = spec.filter_taps;
  if (taps == 0) taps = (static_cast<std::size_t>(fs / 4.0) / 2) * 2 + 1;
  if (taps % 2 == 0) ++taps;
  const auto h = band_pass(spec.low_hz / fs, high / fs, taps);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> white(n + taps - 1);
  for (double& v : white) v = gauss(rng);
  const auto full = detail::fft_convolve(white, h);
  // steady-state part only, no filter start-up
  std::copy_n(full.begin() + static_cast<std::ptrdiff_t>(taps - 1), n, out.begin());
  normalize(out);

  if (!spec.tones.empty()) {
    for (const auto& t : spec.tones) {
      const double w = 2.0 * std::numbers::pi * t.freq_hz / fs;
      for (std::size_t i = 0; i < n; ++i) out[i] += t.amplitude * std::sin(w * static_cast<double>(i) + t.phase);
    }
    normalize(out);
  }
  return Signal(std::move(out), fs);
}

Composition compose_components(std::span<const Signal> sources, const CompositionSpec& spec,
                               std::optional<std::size_t> length) {
  if (sources.empty()) throw Error(ErrorKind::Domain, "compose needs at least one source");
  require_same_rate(sources);
  const double fs = sources.front().sample_rate_hz();
  const std::size_t S = sources.size();
  if (!spec.gains.empty() && spec.gains.size() != S) throw Error(ErrorKind::Dimension, "one gain per source");
  const auto gain = [&](std::size_t s) { return spec.gains.empty() ? 1.0 : spec.gains[s]; };

  Composition out;
  if (spec.mode == CompositionSpec::Mode::Concatenate) {
    std::vector<std::size_t> starts(S, 0);
    if (spec.switch_times_s.empty()) {
      for (std::size_t s = 1; s < S; ++s) starts[s] = starts[s - 1] + sources[s - 1].size();
    } else {
      if (spec.switch_times_s.size() + 1 != S) throw Error(ErrorKind::Dimension, "one switch time between each pair of sources");
      for (std::size_t s = 1; s < S; ++s) {
        starts[s] = static_cast<std::size_t>(std::llround(spec.switch_times_s[s - 1] * fs));
        if (starts[s] < starts[s - 1]) throw Error(ErrorKind::Domain, "switch times must increase");
      }
    }
    const std::size_t natural = starts.back() + sources.back().size();
    const std::size_t n = length.value_or(natural);
    std::vector<double> ref(n, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t begin = std::min(starts[s], n);
      const std::size_t end = std::min(s + 1 < S ? starts[s + 1] : n, n);
      std::vector<double> c(n, 0.0);
      const auto& src = sources[s].samples();
      for (std::size_t i = begin; i < end && i - begin < src.size(); ++i) c[i] = gain(s) * src[i - begin];
      for (std::size_t i = 0; i < n; ++i) ref[i] += c[i];
      out.components.emplace_back(std::move(c), fs);
    }
    out.reference = Signal(std::move(ref), fs);
    return out;
  }

  std::size_t n = sources.front().size();
  for (const auto& s : sources) n = std::min(n, s.size());
  if (length) n = *length;
  std::vector<double> sum(n, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const auto& src = sources[s].samples();
    for (std::size_t i = 0; i < n && i < src.size(); ++i) sum[i] += gain(s) * src[i];
  }
  double p = 0.0;
  for (double v : sum) p += v * v;
  p /= static_cast<double>(n == 0 ? 1 : n);
  const double scale = p > 0.0 ? 1.0 / std::sqrt(p) : 1.0;
  std::vector<double> ref(n, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const auto& src = sources[s].samples();
    std::vector<double> c(n, 0.0);
    const double g = gain(s) * scale;
    for (std::size_t i = 0; i < n && i < src.size(); ++i) c[i] = src[i] * g;
    for (std::size_t i = 0; i < n; ++i) ref[i] += c[i];
    out.components.emplace_back(std::move(c), fs);
  }
  out.reference = Signal(std::move(ref), fs);
  return out;
}

Signal compose(std::span<const Signal> sources, const CompositionSpec& spec, std::optional<std::size_t> length) {
  return compose_components(sources, spec, length).reference;
}

}  // namespace anc
