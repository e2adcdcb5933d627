#pragma once

#include "flatmoor/scenario.hpp"
#include "flatmoor/vessel.hpp"

#include <cstdint>
#include <random>

namespace flatmoor {

/// One draw of the wind process: direction the wind blows toward (NED frame)
/// and absolute speed.
struct WindSample {
  double beta_w = 0.0;  // [rad]
  double V_abs = 0.0;   // [m/s], >= 0
};

/// Uniform draw in [0, 1) using the top 53 bits of the engine output, so the
/// stream is reproducible bit-for-bit from the seed alone.
double uniform01(std::mt19937_64& rng);

/// Weibull quantile function V = lambda * (-ln(1 - u))^(1/k) for u in [0, 1).
double weibull_quantile(double u, double k, double lambda);

/// Draws one raw wind sample: direction ~ N(mu_beta, sigma_beta) via
/// Box-Muller, speed ~ Weibull(k_V, lambda_V) via the inverse CDF. Consumes
/// exactly three engine outputs per call regardless of sigma_beta, so streams
/// with different statistics stay aligned. Deterministic under a fixed seed.
WindSample sample_wind(const WindStats& stats, std::mt19937_64& rng);

/// Wind force/torque on the vessel from the relative wind in the body frame:
///   u_rw = u - V_abs cos(beta_w - psi),  v_rw = v - V_abs sin(beta_w - psi)
///   gamma = -atan2(v_rw, u_rw),          V_rel^2 = u_rw^2 + v_rw^2
///   C_X = -c_x cos(gamma), C_Y = c_y sin(gamma), C_N = c_n sin(2 gamma)
///   tau_w = 1/2 rho_air V_rel^2 (C_X Af, C_Y Al, C_N Al Ls)
/// Pure function of its arguments.
DisturbanceForce wind_force(const WindSample& sample, const VesselState& s,
                            const WindStats& stats);

/// Owns the RNG state and a first-order low-pass filter on the Cartesian
/// wind vector (time constant stats.filter_tau). Raw per-step resampling at
/// plant rate would average to nothing; the filter gives the process the
/// slow drift of a physical breeze. Single-owner: not thread-safe.
class WindGenerator {
 public:
  explicit WindGenerator(const WindStats& stats);

  /// Advances the process by one plant step of length h [s]: draws a fresh
  /// raw sample, relaxes the filtered Cartesian wind vector toward it with
  /// gain 1 - exp(-h / filter_tau), and returns the filtered sample. The
  /// first call initializes the filter to the raw sample itself.
  WindSample step(double h);

  const WindStats& stats() const { return stats_; }

 private:
  WindStats stats_;
  std::mt19937_64 rng_;
  double wx_ = 0.0;  // filtered wind vector, NED [m/s]
  double wy_ = 0.0;
  bool initialized_ = false;
};

}  // namespace flatmoor
