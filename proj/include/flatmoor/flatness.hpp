#pragma once

#include "flatmoor/vessel.hpp"

#include <Eigen/Dense>

namespace flatmoor {

/// Flat output z = (x, y, psi) with derivatives up to second order.
struct FlatPoint {
  Eigen::Vector3d z = Eigen::Vector3d::Zero();
  Eigen::Vector3d dz = Eigen::Vector3d::Zero();
  Eigen::Vector3d ddz = Eigen::Vector3d::Zero();
};

/// Inputs of the fully actuated model as functions of the flat output.
/// theta_tau_v is the fictitious sway force: constraining it to (near) zero
/// recovers the underactuated dynamics.
struct FlatInputs {
  double theta_tau_u = 0.0;  // [N]
  double theta_tau_v = 0.0;  // [N]
  double theta_tau_r = 0.0;  // [N*m]
};

/// State map: x = theta_x(z, dz). Singularity-free.
VesselState theta_x(const FlatPoint& fp);

/// Inverse of theta_x on (z, dz); ddz is left zero.
FlatPoint flat_from_state(const VesselState& s);

/// Input map: (tau_u, tau_v, tau_r) = theta_u(z, dz, ddz) for the fully
/// actuated vessel.
FlatInputs theta_u(const FlatPoint& fp, const VesselParams& p);

// Analytic partials w.r.t. the stacked argument [z; dz; ddz] (column order
// z1 z2 z3 dz1 dz2 dz3 ddz1 ddz2 ddz3), for the NLP transcription.
Eigen::Matrix<double, 6, 9> theta_x_jacobian(const FlatPoint& fp);
Eigen::Matrix<double, 3, 9> theta_u_jacobian(const FlatPoint& fp, const VesselParams& p);

}  // namespace flatmoor
