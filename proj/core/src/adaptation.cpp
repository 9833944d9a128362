#include "anc/adaptation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "anc/error.hpp"

namespace anc {
namespace {

void require_mu(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::Domain, "step size must be finite and non-negative");
}

void check_weights(std::span<const double> w, std::size_t index, const char* who) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || std::abs(w[i]) > kWeightGuard) {
      throw DivergenceError(std::string(who) + " diverged at sample " + std::to_string(index) + " (tap " +
                                std::to_string(i) + ")",
                            index);
    }
  }
}

double mean(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

LmsFilter::LmsFilter(std::size_t taps, double mu) : LmsFilter(std::vector<double>(taps, 0.0), mu) {}

LmsFilter::LmsFilter(std::vector<double> initial_weights, double mu) : filter_(std::move(initial_weights)), mu_(mu) {
  require_mu(mu_);
}

LmsOutput LmsFilter::step(double x, double d) {
  if (!std::isfinite(d)) throw Error(ErrorKind::Data, "non-finite desired sample");
  const double y = filter_.process(x);
  const double e = d - y;
  const double g = (2.0 * mu_) * e;
  std::vector<double> w = filter_.weights();
  const auto hist = filter_.history();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += g * hist[i];
  check_weights(w, steps_, "LMS");
  filter_.set_weights(std::move(w));
  ++steps_;
  return {y, e};
}

std::vector<double> LmsFilter::gradient(double x, double d) const {
  FirFilter probe = filter_;
  const double e = d - probe.process(x);
  const auto hist = probe.history();
  std::vector<double> grad(hist.size());
  for (std::size_t i = 0; i < hist.size(); ++i) grad[i] = -2.0 * e * hist[i];
  return grad;
}

FxlmsController::FxlmsController(std::size_t taps, double mu, FirFilter sec_path_estimate)
    : FxlmsController(std::vector<double>(taps, 0.0), mu, std::move(sec_path_estimate)) {}

FxlmsController::FxlmsController(std::vector<double> initial_weights, double mu, FirFilter sec_path_estimate)
    : control_(std::move(initial_weights)), sec_estimate_(std::move(sec_path_estimate)), mu_(mu) {
  require_mu(mu_);
  sec_estimate_.reset();
  xf_history_.assign(control_.size(), 0.0);
}

double FxlmsController::filter(double x) {
  const double u = control_.process(x);
  const double xf = sec_estimate_.process(x);
  std::copy_backward(xf_history_.begin(), xf_history_.end() - 1, xf_history_.end());
  xf_history_.front() = xf;
  return u;
}

void FxlmsController::adapt(double e) {
  if (!std::isfinite(e)) throw Error(ErrorKind::Data, "non-finite error sample");
  const double g = (2.0 * mu_) * e;
  std::vector<double> w = control_.weights();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= g * xf_history_[i];
  check_weights(w, steps_, "FxLMS");
  control_.set_weights(std::move(w));
  ++steps_;
}

double FxlmsController::step(double x, double e_measured) {
  const double u = filter(x);
  adapt(e_measured);
  return u;
}

std::vector<double> FxlmsController::gradient(double e) const {
  std::vector<double> grad(xf_history_.size());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = 2.0 * e * xf_history_[i];
  return grad;
}

void FxlmsController::set_weights(std::vector<double> weights) { control_.set_weights(std::move(weights)); }

void FxlmsController::set_mu(double mu) {
  require_mu(mu);
  mu_ = mu;
}

FirFilter freeze(const FxlmsController& controller) { return FirFilter(controller.weights()); }

std::vector<double> wiener_solve(std::span<const double> x, std::span<const double> d, std::size_t taps) {
  if (taps == 0) throw Error(ErrorKind::Domain, "wiener_solve needs at least one tap");
  if (x.size() != d.size()) throw Error(ErrorKind::Domain, "wiener_solve needs equal-length records");
  if (x.size() < 10 * taps) {
    throw Error(ErrorKind::Domain, "wiener_solve needs at least 10 N samples (" + std::to_string(10 * taps) + ")");
  }
  const auto n_taps = static_cast<Eigen::Index>(taps);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n_taps, n_taps);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n_taps);
  Eigen::VectorXd xv = Eigen::VectorXd::Zero(n_taps);  // X(n), newest first
  for (std::size_t n = 0; n < x.size(); ++n) {
    for (Eigen::Index i = n_taps - 1; i > 0; --i) xv[i] = xv[i - 1];
    xv[0] = x[n];
    r.selfadjointView<Eigen::Lower>().rankUpdate(xv);
    p += d[n] * xv;
  }
  const double scale = 1.0 / static_cast<double>(x.size());
  r = r.selfadjointView<Eigen::Lower>();
  r *= scale;
  p *= scale;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || smax / smin > 1e12) {
    throw Error(ErrorKind::Conditioning, "autocorrelation matrix is singular or ill-conditioned (cond > 1e12)");
  }
  const Eigen::VectorXd w = r.ldlt().solve(p);
  return std::vector<double>(w.data(), w.data() + w.size());
}

std::vector<double> wiener_solve(const Signal& x, const Signal& d, std::size_t taps) {
  if (x.sample_rate_hz() != d.sample_rate_hz()) throw Error(ErrorKind::Data, "sample rate mismatch");
  return wiener_solve(x.view(), d.view(), taps);
}

double lms_mu_bound(std::span<const double> x, std::size_t taps) {
  if (x.empty()) throw Error(ErrorKind::UndefinedBound, "step-size bound of an empty signal");
  if (taps == 0) throw Error(ErrorKind::Domain, "step-size bound needs at least one tap");
  double power = 0.0;
  for (double v : x) power += v * v;
  power /= static_cast<double>(x.size());
  if (!(power > 0.0)) throw Error(ErrorKind::UndefinedBound, "step-size bound of an all-zero signal");
  return 1.0 / (static_cast<double>(taps) * power);
}

double fxlms_mu_bound(std::span<const double> psi, std::span<const double> e, std::span<const double> xf_norm_sq) {
  if (psi.empty() || psi.size() != e.size() || e.size() != xf_norm_sq.size()) {
    throw Error(ErrorKind::Domain, "step-size bound needs equal-length, nonempty traces");
  }
  std::vector<double> num(psi.size());
  std::vector<double> den(psi.size());
  for (std::size_t n = 0; n < psi.size(); ++n) {
    num[n] = psi[n] * e[n];
    den[n] = psi[n] * psi[n] * xf_norm_sq[n];
  }
  const double d = mean(den);
  if (!(d > 0.0)) throw Error(ErrorKind::UndefinedBound, "step-size bound denominator is zero");
  return 2.0 * mean(num) / d;
}

double fxlms_mu_bound(std::span<const double> e, std::span<const double> xf_norm_sq) {
  return fxlms_mu_bound(e, e, xf_norm_sq);
}

WeightRecorder::WeightRecorder(std::size_t decimation) : decimation_(decimation) {
  if (decimation_ == 0) throw Error(ErrorKind::Domain, "decimation must be at least 1");
}

void WeightRecorder::record(std::span<const double> weights, double e) {
  if (counter_++ % decimation_ != 0) return;
  snapshots_.emplace_back(weights.begin(), weights.end());
  errors_.push_back(e);
}

ConvergenceTrace convergence_trace(const WeightRecorder& recorder, std::span<const double> w_opt) {
  return convergence_trace(recorder.snapshots(), recorder.errors(), w_opt, recorder.decimation());
}

ConvergenceTrace convergence_trace(std::span<const std::vector<double>> snapshots, std::span<const double> errors,
                                   std::span<const double> w_opt, std::size_t decimation) {
  if (snapshots.size() != errors.size()) {
    throw Error(ErrorKind::Dimension, "weight snapshots and error samples differ in count");
  }
  ConvergenceTrace trace;
  trace.decimation = decimation;
  trace.msd.reserve(snapshots.size());
  trace.mse.reserve(errors.size());
  for (std::size_t n = 0; n < snapshots.size(); ++n) {
    if (snapshots[n].size() != w_opt.size()) {
      throw Error(ErrorKind::Dimension, "weight snapshot length " + std::to_string(snapshots[n].size()) +
                                            " does not match optimum length " + std::to_string(w_opt.size()));
    }
    double msd = 0.0;
    for (std::size_t i = 0; i < w_opt.size(); ++i) {
      const double dev = w_opt[i] - snapshots[n][i];
      msd += dev * dev;
    }
    trace.msd.push_back(msd);
    trace.mse.push_back(errors[n] * errors[n]);
  }
  return trace;
}

}  // namespace anc
