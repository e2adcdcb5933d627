#include "flatmoor/flatness.hpp"

#include <cmath>

namespace flatmoor {

VesselState theta_x(const FlatPoint& fp) {
  const double s = std::sin(fp.z(2)), c = std::cos(fp.z(2));
  VesselState st;
  st.x = fp.z(0);
  st.y = fp.z(1);
  st.psi = fp.z(2);
  st.u = s * fp.dz(1) + c * fp.dz(0);
  st.v = c * fp.dz(1) - s * fp.dz(0);
  st.r = fp.dz(2);
  return st;
}

FlatPoint flat_from_state(const VesselState& st) {
  const double s = std::sin(st.psi), c = std::cos(st.psi);
  FlatPoint fp;
  fp.z << st.x, st.y, st.psi;
  fp.dz << st.u * c - st.v * s, st.u * s + st.v * c, st.r;
  return fp;
}

FlatInputs theta_u(const FlatPoint& fp, const VesselParams& p) {
  const double s = std::sin(fp.z(2)), c = std::cos(fp.z(2));
  const double dz1 = fp.dz(0), dz2 = fp.dz(1), dz3 = fp.dz(2);
  const double ddz1 = fp.ddz(0), ddz2 = fp.ddz(1), ddz3 = fp.ddz(2);

  const double surge = s * dz2 + c * dz1;  // u
  const double sway = c * dz2 - s * dz1;   // v

  FlatInputs out;
  out.theta_tau_u = -p.Xuu * surge * std::abs(surge) + p.m11 * s * ddz2 -
                    ((p.m22 - p.m11) * c * dz3 + p.Xu * s) * dz2 -
                    ((p.m11 - p.m22) * s * dz3 + p.Xu * c) * dz1 -
                    0.5 * (p.m23 + p.m32) * dz3 * dz3 + p.m11 * c * ddz1;

  out.theta_tau_v = p.Yvv * (s * dz1 - c * dz2) * std::abs(sway) +
                    p.m22 * c * ddz2 +
                    ((p.m11 - p.m22) * s * dz3 - p.Yv * c) * dz2 +
                    ((p.m11 - p.m22) * c * dz3 + p.Yv * s) * dz1 +
                    p.m23 * ddz3 - p.Yr * dz3 - p.m22 * s * ddz1;

  out.theta_tau_r = p.m32 * c * ddz2 + p.m33 * ddz3 -
                    p.Nrr * dz3 * std::abs(dz3) - p.Nr * dz3 +
                    ((p.m22 - p.m11) * s * c) * dz2 * dz2 +
                    ((p.m11 - p.m22) * (s * s - c * c) * dz1 +
                     0.5 * (p.m23 - p.m32) * s * dz3 - p.Nv * c) *
                        dz2 +
                    ((p.m11 - p.m22) * s * c) * dz1 * dz1 +
                    (0.5 * (p.m23 - p.m32) * c * dz3 + p.Nv * s) * dz1 -
                    p.m32 * s * ddz1;
  return out;
}

Eigen::Matrix<double, 6, 9> theta_x_jacobian(const FlatPoint& fp) {
  const double s = std::sin(fp.z(2)), c = std::cos(fp.z(2));
  const double dz1 = fp.dz(0), dz2 = fp.dz(1);

  Eigen::Matrix<double, 6, 9> J = Eigen::Matrix<double, 6, 9>::Zero();
  J(0, 0) = 1.0;
  J(1, 1) = 1.0;
  J(2, 2) = 1.0;
  // u = s*dz2 + c*dz1
  J(3, 2) = c * dz2 - s * dz1;
  J(3, 3) = c;
  J(3, 4) = s;
  // v = c*dz2 - s*dz1
  J(4, 2) = -s * dz2 - c * dz1;
  J(4, 3) = -s;
  J(4, 4) = c;
  J(5, 5) = 1.0;
  return J;
}

Eigen::Matrix<double, 3, 9> theta_u_jacobian(const FlatPoint& fp, const VesselParams& p) {
  const double s = std::sin(fp.z(2)), c = std::cos(fp.z(2));
  const double dz3 = fp.dz(2);

  // Body-frame transform W = R(psi)^T and its psi-derivatives.
  Eigen::Matrix3d W, Wp, Wpp;
  W << c, s, 0, -s, c, 0, 0, 0, 1;
  Wp << -s, c, 0, -c, -s, 0, 0, 0, 0;
  Wpp << -c, -s, 0, s, -c, 0, 0, 0, 0;

  const Eigen::Vector3d nu = W * fp.dz;
  const Eigen::Vector3d Wp_dz = Wp * fp.dz;

  // tau = M*nu_dot + G(nu) with G = (C(nu)+D(nu))nu; dG/dnu below.
  const double u = nu(0), v = nu(1), r = nu(2);
  const double mbar = 0.5 * (p.m23 + p.m32);
  Eigen::Matrix3d Gnu;
  Gnu << -(p.Xu + 2.0 * p.Xuu * std::abs(u)), -p.m22 * r, -p.m22 * v - 2.0 * mbar * r,
      p.m11 * r, -(p.Yv + 2.0 * p.Yvv * std::abs(v)), p.m11 * u - p.Yr,
      (p.m22 - p.m11) * v + mbar * r, (p.m22 - p.m11) * u - p.Nv,
      mbar * u - (p.Nr + 2.0 * p.Nrr * std::abs(r));

  const Eigen::Matrix3d M = mass_matrix(p);

  Eigen::Matrix<double, 3, 9> J = Eigen::Matrix<double, 3, 9>::Zero();
  // d/dz3: nu_dot = W*ddz + dz3*Wp*dz.
  J.col(2) = M * (Wp * fp.ddz + dz3 * (Wpp * fp.dz)) + Gnu * Wp_dz;
  // d/ddz.
  Eigen::Matrix3d d_nudot_ddz = dz3 * Wp;
  d_nudot_ddz.col(2) += Wp_dz;
  J.block<3, 3>(0, 3) = M * d_nudot_ddz + Gnu * W;
  // d/dddz.
  J.block<3, 3>(0, 6) = M * W;
  return J;
}

}  // namespace flatmoor
