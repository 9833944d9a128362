#include "anc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "anc/error.hpp"
#include "fft.hpp"

namespace anc {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

void require_frame(const Signal& x, std::size_t len, const char* what) {
  if (!is_power_of_two(len)) throw Error(ErrorKind::Domain, std::string(what) + " length must be a power of two");
  if (len < 2) throw Error(ErrorKind::Domain, std::string(what) + " length must be at least 2");
  if (x.size() < len) {
    throw Error(ErrorKind::Domain, "signal of " + std::to_string(x.size()) + " samples is shorter than the " +
                                       std::string(what) + " (" + std::to_string(len) + ")");
  }
}

/// One-sided per-bin power of a windowed frame; bins sum to sum((w x)^2) / sum(w^2).
class FramePower {
 public:
  explicit FramePower(std::size_t len) : len_(len), window_(hann(len)), fft_(len), buf_(len), mag_(len / 2 + 1) {
    for (double w : window_) window_energy_ += w * w;
  }

  const std::vector<double>& operator()(std::span<const double> frame) {
    for (std::size_t i = 0; i < len_; ++i) buf_[i] = frame[i] * window_[i];
    fft_.power(buf_, mag_);
    const double norm = 1.0 / (static_cast<double>(len_) * window_energy_);
    for (std::size_t k = 0; k < mag_.size(); ++k) {
      const bool edge = k == 0 || k == len_ / 2;
      mag_[k] *= (edge ? 1.0 : 2.0) * norm;
    }
    return mag_;
  }

 private:
  std::size_t len_;
  std::vector<double> window_;
  double window_energy_ = 0.0;
  detail::RealFft fft_;
  std::vector<double> buf_;
  std::vector<double> mag_;
};

std::vector<double> bin_frequencies(std::size_t len, double fs) {
  std::vector<double> f(len / 2 + 1);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = static_cast<double>(k) * fs / static_cast<double>(len);
  return f;
}

void require_pairs(std::span<const Signal> d, std::span<const Signal> e) {
  if (d.empty() || d.size() != e.size()) {
    throw Error(ErrorKind::Dimension, "disturbance and error need the same nonzero number of microphones");
  }
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k].size() != e[k].size() || d[k].size() != d[0].size()) {
      throw Error(ErrorKind::Dimension, "disturbance and error signals must have equal lengths");
    }
    if (d[k].sample_rate_hz() != e[k].sample_rate_hz() || d[k].sample_rate_hz() != d[0].sample_rate_hz()) {
      throw Error(ErrorKind::Data, "disturbance and error sample rates differ");
    }
  }
}

}  // namespace

Level Level::from_powers(double numerator, double denominator) {
  if (!(numerator > 0.0)) return Level{Kind::Undefined, 0.0};
  if (!(denominator > 0.0)) return Level{Kind::Unbounded, 0.0};
  return Level{Kind::Finite, 10.0 * std::log10(numerator / denominator)};
}

std::string to_string(const Level& level) {
  switch (level.kind) {
    case Level::Kind::Finite: return std::to_string(level.db) + " dB";
    case Level::Kind::Unbounded: return "unbounded";
    case Level::Kind::Undefined: return "undefined";
  }
  return "undefined";
}

double clamp_db(double linear_power) noexcept {
  if (!(linear_power > 0.0)) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(linear_power));
}

std::vector<Level> noise_reduction_per_interval(std::span<const Signal> d, std::span<const Signal> e,
                                                double interval_s) {
  require_pairs(d, e);
  if (!(interval_s > 0.0)) throw Error(ErrorKind::Domain, "analysis interval must be positive");
  const auto per = static_cast<std::size_t>(std::llround(interval_s * d[0].sample_rate_hz()));
  if (per == 0) throw Error(ErrorKind::Domain, "analysis interval is shorter than one sample");
  const std::size_t count = d[0].size() / per;
  std::vector<Level> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    double pd = 0.0, pe = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      for (std::size_t n = c * per; n < (c + 1) * per; ++n) {
        pd += d[k][n] * d[k][n];
        pe += e[k][n] * e[k][n];
      }
    }
    out.push_back(Level::from_powers(pd, pe));
  }
  return out;
}

std::vector<Level> noise_reduction_per_interval(const Signal& d, const Signal& e, double interval_s) {
  return noise_reduction_per_interval(std::span<const Signal>(&d, 1), std::span<const Signal>(&e, 1), interval_s);
}

Level snr_overall(std::span<const Signal> d, std::span<const Signal> e) {
  require_pairs(d, e);
  double pd = 0.0, pe = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    for (std::size_t n = 0; n < d[k].size(); ++n) {
      pd += d[k][n] * d[k][n];
      pe += e[k][n] * e[k][n];
    }
  }
  return Level::from_powers(pd, pe);
}

Level snr_overall(const Signal& d, const Signal& e) {
  return snr_overall(std::span<const Signal>(&d, 1), std::span<const Signal>(&e, 1));
}

Spectrum power_spectrum(const Signal& x, std::size_t segment_len, double overlap) {
  require_frame(x, segment_len, "segment");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw Error(ErrorKind::Domain, "overlap must lie in [0, 1)");
  const auto overlap_samples = static_cast<std::size_t>(std::floor(static_cast<double>(segment_len) * overlap));
  const std::size_t hop = std::max<std::size_t>(1, segment_len - overlap_samples);

  FramePower frame_power(segment_len);
  Spectrum s;
  s.freq_hz = bin_frequencies(segment_len, x.sample_rate_hz());
  s.power.assign(s.freq_hz.size(), 0.0);
  for (std::size_t start = 0; start + segment_len <= x.size(); start += hop) {
    const auto& p = frame_power(x.view().subspan(start, segment_len));
    for (std::size_t k = 0; k < p.size(); ++k) s.power[k] += p[k];
    ++s.segments;
  }
  s.power_db.resize(s.power.size());
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    s.power[k] /= static_cast<double>(s.segments);
    s.power_db[k] = clamp_db(s.power[k]);
  }
  return s;
}

Spectrogram spectrogram(const Signal& x, std::size_t frame_len, std::size_t hop) {
  require_frame(x, frame_len, "frame");
  if (hop == 0 || hop > frame_len) throw Error(ErrorKind::Domain, "hop must satisfy 0 < hop <= frame length");
  FramePower frame_power(frame_len);
  Spectrogram sg;
  sg.freq_hz = bin_frequencies(frame_len, x.sample_rate_hz());
  for (std::size_t start = 0; start + frame_len <= x.size(); start += hop) {
    const auto& p = frame_power(x.view().subspan(start, frame_len));
    std::vector<double> row(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) row[k] = clamp_db(p[k]);
    sg.power_db.push_back(std::move(row));
    sg.frame_time_s.push_back(static_cast<double>(start) / x.sample_rate_hz());
  }
  return sg;
}

}  // namespace anc
