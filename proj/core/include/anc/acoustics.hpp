#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "anc/filter.hpp"

namespace anc {

/// Plane-wave superposition parameters: primary p1 = A cos(wt - phi),
/// secondary p2 = beta * A cos(wt - phi + alpha).
struct WaveParams {
  double amplitude = 0.0;
  double omega = 1.0;
  double phi = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
};

struct MediumParams {
  double rho = 1.21;   // kg/m^3
  double c = 343.0;    // m/s
};

/// Average incident sound energy density A^2 / (4 rho c^2), in J/m^3.
double energy_density(double amplitude, const MediumParams& medium);

/// Energy density of the superposed field, E1 * (1 + 2 beta cos(alpha) + beta^2).
double superposed_energy_density(const WaveParams& wave, const MediumParams& medium);

/// Level difference 10 lg(E1/E2) between the primary field and the superposed
/// field. Positive values are attenuation. `perfect_cancellation` is set (and
/// `db` is meaningless) when the superposed energy is exactly zero.
struct SplDelta {
  double db = 0.0;
  bool perfect_cancellation = false;
};

SplDelta spl_delta(double beta, double alpha);

/// Parameters of the decaying-exponential synthetic path generator:
/// taps[k] = gain * decay^(k - delay) for k >= delay, zero before.
struct SyntheticPath {
  std::size_t delay = 0;
  double gain = 1.0;
  double decay = 0.5;
  std::size_t length = 16;
  double perturbation = 0.0;  // uniform +/- fraction applied tap-wise
};

SyntheticPath default_primary_path();
SyntheticPath default_secondary_path();

/// Generates the taps; the perturbation uses `rng` when nonzero.
std::vector<double> synthesize_path(const SyntheticPath& spec, std::mt19937_64& rng);

/// Simulated feedforward acoustic plant.
///
/// Inputs drive the primary grid (inputs x K), loudspeakers drive the
/// secondary grid (J x K). The microphone signal is
///   e[k] = sum_i (P[i][k] * x_i) + sum_j (S[j][k] * u_j) + noise,
/// i.e. the secondary contribution is ADDED, so a controller must drive the
/// loudspeakers toward the negated disturbance.
class Plant {
 public:
  Plant(std::vector<std::vector<FirFilter>> primary, std::vector<std::vector<FirFilter>> secondary,
        double measurement_noise_std = 0.0, std::uint64_t noise_seed = 0);

  /// Single-input, single-loudspeaker, single-microphone convenience form.
  static Plant siso(std::vector<double> primary, std::vector<double> secondary,
                    double measurement_noise_std = 0.0, std::uint64_t noise_seed = 0);

  std::size_t inputs() const noexcept { return primary_.size(); }
  std::size_t sources() const noexcept { return secondary_.size(); }
  std::size_t mics() const noexcept { return mics_; }
  double measurement_noise_std() const noexcept { return noise_std_; }

  const FirFilter& primary_path(std::size_t input, std::size_t mic) const { return primary_.at(input).at(mic); }
  const FirFilter& secondary_path(std::size_t source, std::size_t mic) const { return secondary_.at(source).at(mic); }

  /// Advances every path by one sample and returns the K microphone samples.
  std::vector<double> step(std::span<const double> x, std::span<const double> u);
  void step(std::span<const double> x, std::span<const double> u, std::span<double> e);

  /// Scalar form for single-input plants.
  std::vector<double> step(double x, std::span<const double> u);

  void reset();

 private:
  std::vector<std::vector<FirFilter>> primary_;
  std::vector<std::vector<FirFilter>> secondary_;
  std::size_t mics_ = 0;
  double noise_std_ = 0.0;
  std::uint64_t noise_seed_ = 0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace anc
