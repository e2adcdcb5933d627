#include "flatmoor/wind.hpp"

#include <cmath>

namespace flatmoor {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double weibull_quantile(double u, double k, double lambda) {
  return lambda * std::pow(-std::log1p(-u), 1.0 / k);
}

WindSample sample_wind(const WindStats& stats, std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double u3 = uniform01(rng);
  // Box-Muller: 1 - u1 lies in (0, 1], so the log is finite.
  const double z =
      std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
  WindSample s;
  s.beta_w = stats.mu_beta + stats.sigma_beta * z;
  s.V_abs = weibull_quantile(u3, stats.k_V, stats.lambda_V);
  return s;
}

DisturbanceForce wind_force(const WindSample& sample, const VesselState& s,
                            const WindStats& stats) {
  const double u_rw = s.u - sample.V_abs * std::cos(sample.beta_w - s.psi);
  const double v_rw = s.v - sample.V_abs * std::sin(sample.beta_w - s.psi);
  const double V_rel_sq = u_rw * u_rw + v_rw * v_rw;
  const double gamma = -std::atan2(v_rw, u_rw);
  const double C_X = -stats.c_x * std::cos(gamma);
  const double C_Y = stats.c_y * std::sin(gamma);
  const double C_N = stats.c_n * std::sin(2.0 * gamma);
  const double q = 0.5 * stats.rho_air * V_rel_sq;
  DisturbanceForce f;
  f.fx = q * C_X * stats.Af;
  f.fy = q * C_Y * stats.Al;
  f.mz = q * C_N * stats.Al * stats.Ls;
  return f;
}

WindGenerator::WindGenerator(const WindStats& stats)
    : stats_(stats), rng_(stats.seed) {}

WindSample WindGenerator::step(double h) {
  const WindSample raw = sample_wind(stats_, rng_);
  const double tx = raw.V_abs * std::cos(raw.beta_w);
  const double ty = raw.V_abs * std::sin(raw.beta_w);
  if (!initialized_) {
    wx_ = tx;
    wy_ = ty;
    initialized_ = true;
  } else {
    const double alpha = -std::expm1(-h / stats_.filter_tau);
    wx_ += alpha * (tx - wx_);
    wy_ += alpha * (ty - wy_);
  }
  WindSample out;
  out.V_abs = std::hypot(wx_, wy_);
  out.beta_w = (out.V_abs > 0.0) ? std::atan2(wy_, wx_) : stats_.mu_beta;
  return out;
}

}  // namespace flatmoor
