#include "anc/mcanc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "anc/error.hpp"

namespace anc {

void ChannelConfig::validate() const {
  if (references == 0 || sources == 0 || mics == 0 || taps == 0 || path_taps == 0) {
    throw Error(ErrorKind::Domain, "channel counts and filter lengths must all be at least 1");
  }
}

MacBreakdown mac_count(const ChannelConfig& cfg) {
  cfg.validate();
  const std::uint64_t i = cfg.references, j = cfg.sources, k = cfg.mics, l = cfg.taps, m = cfg.path_taps;
  return MacBreakdown{i * j * l, i * j * k * m, i * j * k * l + k};
}

std::uint64_t mac_count_standard(std::uint64_t channels, std::uint64_t taps) {
  return 2 * taps * channels * channels * channels + taps * channels * channels + channels;
}

McAncController::McAncController(ChannelConfig cfg, double mu, std::vector<std::vector<FirFilter>> sec_estimates)
    : cfg_(cfg), mu_(mu), sec_estimates_(std::move(sec_estimates)) {
  cfg_.validate();
  set_mu(mu);
  if (sec_estimates_.size() != cfg_.sources) {
    throw Error(ErrorKind::Dimension, "expected " + std::to_string(cfg_.sources) + " rows of secondary estimates");
  }
  for (const auto& row : sec_estimates_) {
    if (row.size() != cfg_.mics) {
      throw Error(ErrorKind::Dimension, "expected " + std::to_string(cfg_.mics) + " secondary estimates per source");
    }
    for (const auto& f : row) {
      if (f.size() != cfg_.path_taps) {
        throw Error(ErrorKind::Dimension, "secondary estimate length " + std::to_string(f.size()) + " != M = " +
                                              std::to_string(cfg_.path_taps));
      }
    }
  }
  history_len_ = std::max(cfg_.taps, cfg_.path_taps);
  weights_.assign(cfg_.references * cfg_.sources * cfg_.taps, 0.0);
  x_history_.assign(cfg_.references * history_len_, 0.0);
  fx_history_.assign(cfg_.references * cfg_.sources * cfg_.mics * cfg_.taps, 0.0);
  step_gain_.assign(cfg_.mics, 0.0);
}

void McAncController::set_mu(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::Domain, "step size must be finite and non-negative");
  mu_ = mu;
}

std::span<const double> McAncController::weights(std::size_t i, std::size_t j) const {
  if (i >= cfg_.references || j >= cfg_.sources) throw Error(ErrorKind::Dimension, "filter index out of range");
  return std::span<const double>(weights_).subspan(w_index(i, j), cfg_.taps);
}

void McAncController::set_weights(std::size_t i, std::size_t j, std::span<const double> w) {
  if (i >= cfg_.references || j >= cfg_.sources) throw Error(ErrorKind::Dimension, "filter index out of range");
  if (w.size() != cfg_.taps) throw Error(ErrorKind::Dimension, "weight vector length must equal L");
  for (double v : w) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Data, "weights must be finite");
  }
  std::copy(w.begin(), w.end(), weights_.begin() + static_cast<std::ptrdiff_t>(w_index(i, j)));
}

std::span<const double> McAncController::filtered_history(std::size_t i, std::size_t j, std::size_t k) const {
  if (i >= cfg_.references || j >= cfg_.sources || k >= cfg_.mics) {
    throw Error(ErrorKind::Dimension, "filtered reference index out of range");
  }
  return std::span<const double>(fx_history_).subspan(fx_index(i, j, k), cfg_.taps);
}

template <bool kCount>
void McAncController::filter_impl(std::span<const double> x, std::span<double> u) {
  const std::size_t I = cfg_.references, J = cfg_.sources, K = cfg_.mics, L = cfg_.taps, M = cfg_.path_taps;
  for (std::size_t i = 0; i < I; ++i) {
    if (!std::isfinite(x[i])) throw Error(ErrorKind::Data, "non-finite reference sample");
    double* line = x_history_.data() + i * history_len_;
    std::copy_backward(line, line + history_len_ - 1, line + history_len_);
    line[0] = x[i];
  }
  // Step 1: y^(j)(n) = sum_i sum_l w_l^(i,j) x_i(n - l).
  for (std::size_t j = 0; j < J; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < I; ++i) {
      const double* w = weights_.data() + w_index(i, j);
      const double* line = x_history_.data() + i * history_len_;
      for (std::size_t l = 0; l < L; ++l) acc += w[l] * line[l];
      if constexpr (kCount) macs_ += L;
    }
    u[j] = acc;
  }
  // Step 2: fx_{i,j,k}(n) = sum_{m=0}^{M-1} hs_m^(j,k) x_i(n - m).
  for (std::size_t i = 0; i < I; ++i) {
    const double* line = x_history_.data() + i * history_len_;
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t k = 0; k < K; ++k) {
        const auto& hs = sec_estimates_[j][k].weights();
        double acc = 0.0;
        for (std::size_t m = 0; m < M; ++m) acc += hs[m] * line[m];
        if constexpr (kCount) macs_ += M;
        double* fx = fx_history_.data() + fx_index(i, j, k);
        std::copy_backward(fx, fx + L - 1, fx + L);
        fx[0] = acc;
      }
    }
  }
}

template <bool kCount>
void McAncController::adapt_impl(std::span<const double> e) {
  const std::size_t I = cfg_.references, J = cfg_.sources, K = cfg_.mics, L = cfg_.taps;
  double cost = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!std::isfinite(e[k])) throw Error(ErrorKind::Data, "non-finite error sample");
    step_gain_[k] = mu_ * e[k];
    cost += e[k] * e[k];
  }
  if constexpr (kCount) macs_ += K;
  cost_ = cost;
  // Step 3: w_l^(i,j) -= sum_k (mu e^(k)) fx^(i,j,k)(n - l); the k-sum is
  // formed first so the result does not depend on microphone order for K = 2.
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      double* w = weights_.data() + w_index(i, j);
      const double* fx0 = fx_history_.data() + fx_index(i, j, 0);
      for (std::size_t l = 0; l < L; ++l) {
        double acc = step_gain_[0] * fx0[l];
        for (std::size_t k = 1; k < K; ++k) acc += step_gain_[k] * fx0[k * L + l];
        w[l] -= acc;
      }
      if constexpr (kCount) macs_ += K * L;
      for (std::size_t l = 0; l < L; ++l) {
        if (!std::isfinite(w[l]) || std::abs(w[l]) > kWeightGuard) {
          throw DivergenceError("multichannel FxLMS diverged at sample " + std::to_string(steps_) + " in filter (" +
                                    std::to_string(i) + ", " + std::to_string(j) + ")",
                                steps_);
        }
      }
    }
  }
  ++steps_;
}

void McAncController::filter(std::span<const double> x, std::span<double> u) {
  if (x.size() != cfg_.references || u.size() != cfg_.sources) {
    throw Error(ErrorKind::Dimension, "controller expects " + std::to_string(cfg_.references) + " references and " +
                                          std::to_string(cfg_.sources) + " outputs");
  }
  if (count_macs_) {
    filter_impl<true>(x, u);
  } else {
    filter_impl<false>(x, u);
  }
}

std::vector<double> McAncController::filter(std::span<const double> x) {
  std::vector<double> u(cfg_.sources);
  filter(x, u);
  return u;
}

void McAncController::adapt(std::span<const double> e) {
  if (e.size() != cfg_.mics) {
    throw Error(ErrorKind::Dimension, "controller expects " + std::to_string(cfg_.mics) + " error samples");
  }
  if (count_macs_) {
    adapt_impl<true>(e);
  } else {
    adapt_impl<false>(e);
  }
}

std::vector<double> McAncController::step(std::span<const double> x, std::span<const double> e) {
  std::vector<double> u = filter(x);
  adapt(e);
  return u;
}

MacMeasurement mac_measure(const ChannelConfig& cfg, std::size_t n_samples, std::uint64_t seed) {
  cfg.validate();
  if (n_samples == 0) throw Error(ErrorKind::Domain, "mac_measure needs at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<FirFilter>> estimates(cfg.sources);
  for (auto& row : estimates) {
    for (std::size_t k = 0; k < cfg.mics; ++k) {
      std::vector<double> taps(cfg.path_taps);
      for (double& t : taps) t = 0.1 * gauss(rng);
      row.emplace_back(std::move(taps));
    }
  }
  McAncController ctrl(cfg, 1e-4, std::move(estimates));
  ctrl.set_mac_counting(true);
  std::vector<double> x(cfg.references), e(cfg.mics), u(cfg.sources);
  for (std::size_t n = 0; n < n_samples; ++n) {
    for (double& v : x) v = gauss(rng);
    for (double& v : e) v = 0.1 * gauss(rng);
    ctrl.filter(x, u);
    ctrl.adapt(e);
  }
  MacMeasurement m;
  m.total = ctrl.mac_operations();
  m.samples = n_samples;
  m.per_sample = m.total / n_samples;
  return m;
}

}  // namespace anc
