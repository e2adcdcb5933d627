#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace flatmoor {

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Pose in the NED frame plus body-fixed velocities.
/// The heading psi is stored unwrapped (no modular reduction) so that
/// spline fits and terminal constraints stay continuous across turns.
struct VesselState {
  double x = 0.0;    // north position [m]
  double y = 0.0;    // east position [m]
  double psi = 0.0;  // heading [rad], unwrapped
  double u = 0.0;    // surge velocity [m/s]
  double v = 0.0;    // sway velocity [m/s]
  double r = 0.0;    // yaw rate [rad/s]

  Vec6 vec() const;
  static VesselState from_vec(const Vec6& s);
  bool finite() const;
};

/// 3DOF maneuvering model parameters. Mass-matrix entries are stored
/// directly; damping coefficients are negative as tabulated.
struct VesselParams {
  // mass matrix [kg, kg*m, kg*m^2]
  double m11 = 0.0, m22 = 0.0, m23 = 0.0, m32 = 0.0, m33 = 0.0;
  // linear damping
  double Xu = 0.0, Yv = 0.0, Yr = 0.0, Nv = 0.0, Nr = 0.0;
  // quadratic (modulus-model) damping
  double Xuu = 0.0, Yvv = 0.0, Nrr = 0.0;
  // geometry and mass
  double Ls = 0.0;    // length [m]
  double Ws = 0.0;    // width [m]
  double mass = 0.0;  // [kg]
  // input bounds
  double tau_u_min = 0.0, tau_u_max = 0.0;  // surge force [N]
  double tau_r_min = 0.0, tau_r_max = 0.0;  // yaw torque [N*m]

  /// Parameter set for the 1.2 m model ship used throughout the default
  /// scenario.
  static VesselParams model_ship();

  /// Returns a list of invariant violations, empty when valid.
  std::vector<std::string> validate() const;
};

struct ControlInput {
  double tau_u = 0.0;  // surge force [N]
  double tau_r = 0.0;  // yaw torque [N*m]
};

struct DisturbanceForce {
  double fx = 0.0;  // surge force [N]
  double fy = 0.0;  // sway force [N]
  double mz = 0.0;  // yaw torque [N*m]
};

/// Actuator configuration: the underactuated vessel has no sway input;
/// full mode adds a caller-supplied sway force (used by the flatness maps).
struct Actuation {
  enum class Mode { Underactuated, Full };
  Mode mode = Mode::Underactuated;
  double tau_v = 0.0;  // sway force [N], Full mode only

  static Actuation underactuated() { return {}; }
  static Actuation full(double tau_v) { return {Mode::Full, tau_v}; }
};

/// R(psi): rotation from body-fixed to NED coordinates.
Eigen::Matrix3d rotation_matrix(double psi);

Eigen::Matrix3d mass_matrix(const VesselParams& p);
Eigen::Matrix3d coriolis_matrix(const Eigen::Vector3d& nu, const VesselParams& p);
Eigen::Matrix3d damping_matrix(const Eigen::Vector3d& nu, const VesselParams& p);

/// Continuous-time dynamics [eta_dot; nu_dot] = [R(psi)nu; M^-1(-(C+D)nu + B tau + tau_w)].
/// Throws std::invalid_argument on non-finite inputs.
Vec6 state_derivative(const VesselState& s, const ControlInput& c,
                      const DisturbanceForce& d, const VesselParams& p,
                      const Actuation& act = Actuation::underactuated());

struct PlantTrajectory {
  std::vector<double> time;
  std::vector<VesselState> states;
};

/// Input sampler: time [s] -> (control, disturbance).
using InputFn = std::function<std::pair<ControlInput, DisturbanceForce>(double)>;

/// Classical fixed-step RK4 over [0, t_span]; t_span must be an integer
/// multiple of h within 1e-9. Returns states at every step including both
/// endpoints. Throws std::runtime_error with the failure time if the state
/// leaves the finite range, std::invalid_argument on bad step setup.
PlantTrajectory integrate_rk4(const VesselState& s0, const InputFn& input_fn,
                              const VesselParams& p, double t_span, double h,
                              const Actuation& act = Actuation::underactuated());

}  // namespace flatmoor
