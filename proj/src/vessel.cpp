#include "flatmoor/vessel.hpp"

#include <cmath>
#include <stdexcept>

namespace flatmoor {

Vec6 VesselState::vec() const {
  Vec6 s;
  s << x, y, psi, u, v, r;
  return s;
}

VesselState VesselState::from_vec(const Vec6& s) {
  return {s(0), s(1), s(2), s(3), s(4), s(5)};
}

bool VesselState::finite() const { return vec().allFinite(); }

VesselParams VesselParams::model_ship() {
  VesselParams p;
  p.m11 = 25.8;
  p.m22 = 33.8;
  p.m23 = 6.2;
  p.m32 = 6.2;
  p.m33 = 2.76;
  p.Xu = -12.0;
  p.Yv = -17.0;
  p.Yr = -0.2;
  p.Nv = -0.5;
  p.Nr = -0.5;
  p.Xuu = -2.1;
  p.Yvv = -4.5;
  p.Nrr = -0.1;
  p.Ls = 1.2;
  p.Ws = 0.35;
  p.mass = 17.0;
  p.tau_u_min = -5.0;
  p.tau_u_max = 5.0;
  p.tau_r_min = -0.2;
  p.tau_r_max = 0.2;
  return p;
}

std::vector<std::string> VesselParams::validate() const {
  std::vector<std::string> issues;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) issues.push_back(msg);
  };
  require(m11 > 0.0, "m11 must be positive");
  require(m22 > 0.0, "m22 must be positive");
  require(m33 > 0.0, "m33 must be positive");
  require(m22 * m33 - m23 * m32 > 0.0,
          "sway-yaw mass block must have positive determinant");
  require(Xu <= 0.0, "Xu must be <= 0");
  require(Yv <= 0.0, "Yv must be <= 0");
  require(Yr <= 0.0, "Yr must be <= 0");
  require(Nv <= 0.0, "Nv must be <= 0");
  require(Nr <= 0.0, "Nr must be <= 0");
  require(Xuu <= 0.0, "Xuu must be <= 0");
  require(Yvv <= 0.0, "Yvv must be <= 0");
  require(Nrr <= 0.0, "Nrr must be <= 0");
  require(Ls > 0.0, "length must be positive");
  require(Ws > 0.0, "width must be positive");
  require(mass > 0.0, "mass must be positive");
  require(tau_u_min < tau_u_max, "tau_u bounds must be ordered");
  require(tau_r_min < tau_r_max, "tau_r bounds must be ordered");
  return issues;
}

Eigen::Matrix3d rotation_matrix(double psi) {
  const double c = std::cos(psi), s = std::sin(psi);
  Eigen::Matrix3d R;
  R << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return R;
}

Eigen::Matrix3d mass_matrix(const VesselParams& p) {
  Eigen::Matrix3d M;
  M << p.m11, 0.0, 0.0, 0.0, p.m22, p.m23, 0.0, p.m32, p.m33;
  return M;
}

Eigen::Matrix3d coriolis_matrix(const Eigen::Vector3d& nu, const VesselParams& p) {
  const double c13 = -p.m22 * nu(1) - 0.5 * (p.m23 + p.m32) * nu(2);
  const double c23 = p.m11 * nu(0);
  Eigen::Matrix3d C;
  C << 0.0, 0.0, c13, 0.0, 0.0, c23, -c13, -c23, 0.0;
  return C;
}

Eigen::Matrix3d damping_matrix(const Eigen::Vector3d& nu, const VesselParams& p) {
  Eigen::Matrix3d D;
  D << p.Xu + p.Xuu * std::abs(nu(0)), 0.0, 0.0,
      0.0, p.Yv + p.Yvv * std::abs(nu(1)), p.Yr,
      0.0, p.Nv, p.Nr + p.Nrr * std::abs(nu(2));
  return -D;
}

Vec6 state_derivative(const VesselState& s, const ControlInput& c,
                      const DisturbanceForce& d, const VesselParams& p,
                      const Actuation& act) {
  if (!s.finite() || !std::isfinite(c.tau_u) || !std::isfinite(c.tau_r) ||
      !std::isfinite(d.fx) || !std::isfinite(d.fy) || !std::isfinite(d.mz) ||
      (act.mode == Actuation::Mode::Full && !std::isfinite(act.tau_v))) {
    throw std::invalid_argument("state_derivative: non-finite input");
  }

  const Eigen::Vector3d nu(s.u, s.v, s.r);

  const double tau_v = act.mode == Actuation::Mode::Full ? act.tau_v : 0.0;
  const Eigen::Vector3d force(c.tau_u + d.fx, tau_v + d.fy, c.tau_r + d.mz);

  const Eigen::Vector3d rhs =
      -(coriolis_matrix(nu, p) + damping_matrix(nu, p)) * nu + force;

  // M is block diagonal: surge decouples from the sway-yaw pair.
  const double det = p.m22 * p.m33 - p.m23 * p.m32;
  Eigen::Vector3d nu_dot;
  nu_dot(0) = rhs(0) / p.m11;
  nu_dot(1) = (p.m33 * rhs(1) - p.m23 * rhs(2)) / det;
  nu_dot(2) = (-p.m32 * rhs(1) + p.m22 * rhs(2)) / det;

  Vec6 ds;
  ds.head<3>() = rotation_matrix(s.psi) * nu;
  ds.tail<3>() = nu_dot;
  return ds;
}

PlantTrajectory integrate_rk4(const VesselState& s0, const InputFn& input_fn,
                              const VesselParams& p, double t_span, double h,
                              const Actuation& act) {
  if (!(h > 0.0)) throw std::invalid_argument("integrate_rk4: step must be positive");
  const double steps_real = t_span / h;
  const double steps_round = std::round(steps_real);
  if (std::abs(steps_real - steps_round) > 1e-9 * std::max(1.0, steps_real)) {
    throw std::invalid_argument("integrate_rk4: span is not a multiple of the step");
  }
  if (steps_round > 5e8) throw std::invalid_argument("integrate_rk4: step count overflow");
  const long n_steps = static_cast<long>(steps_round);

  PlantTrajectory traj;
  traj.time.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.time.push_back(0.0);
  traj.states.push_back(s0);

  VesselState s = s0;
  auto deriv = [&](double t, const Vec6& sv) {
    auto [ci, di] = input_fn(t);
    return state_derivative(VesselState::from_vec(sv), ci, di, p, act);
  };

  for (long k = 0; k < n_steps; ++k) {
    const double t = k * h;
    const Vec6 sv = s.vec();
    const Vec6 k1 = deriv(t, sv);
    const Vec6 k2 = deriv(t + 0.5 * h, sv + 0.5 * h * k1);
    const Vec6 k3 = deriv(t + 0.5 * h, sv + 0.5 * h * k2);
    const Vec6 k4 = deriv(t + h, sv + h * k3);
    const Vec6 next = sv + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
    if (!next.allFinite()) {
      throw std::runtime_error("integrate_rk4: non-finite state at t=" +
                               std::to_string(t + h));
    }
    s = VesselState::from_vec(next);
    traj.time.push_back((k + 1) * h);
    traj.states.push_back(s);
  }
  return traj;
}

}  // namespace flatmoor
