#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace flatmoor {

/// Clamped knot vector on [0, t_f]: the first and last degree+1 knots are
/// repeated so the curve interpolates its first and last control points.
struct KnotVector {
  std::vector<double> knots;  // u_0..u_M, non-decreasing
  int degree = 0;             // D

  /// Uniform interior spacing; n_ctrl = N+1 control points require
  /// M+1 = n_ctrl + degree + 1 knots.
  static KnotVector clamped_uniform(int degree, int n_ctrl, double t_f);

  int num_basis() const { return static_cast<int>(knots.size()) - degree - 1; }
  double t_f() const { return knots.back(); }
  std::vector<std::string> validate() const;
};

/// Cox-DeBoor basis B_{i,d}(t) with the 0/0 = 0 convention. The degree-0
/// intervals are half-open except the final one, which is closed at t_f so
/// the last basis function evaluates to 1 there.
/// Throws std::out_of_range for t outside [0, t_f] and for bad indices.
double basis(int i, int d, double t, const KnotVector& kv);

/// k-th derivative B^{(k)}_{i,d}(t) via the lower-degree recursion with the
/// d/(u_{i+d} - u_i) factors; repeated-knot zero denominators contribute
/// zero. Throws std::invalid_argument when k > d.
double basis_derivative(int i, int d, int k, double t, const KnotVector& kv);

/// One clamped spline per flat output, sharing degree and knots; control
/// points are rows of ctrl, one column per output.
struct SplineTrajectory {
  KnotVector kv;
  Eigen::Matrix<double, Eigen::Dynamic, 3> ctrl;

  /// z^(k)(t); k = 0 gives the curve itself.
  Eigen::Vector3d eval(double t, int k) const;
  double t_f() const { return kv.t_f(); }
};

/// Collocation matrix: row for each time, column for each basis function,
/// entry = B^{(k)}_{i,D}(t). Curve samples at all times are then matrix * p.
Eigen::MatrixXd basis_matrix(const KnotVector& kv, const std::vector<double>& times,
                             int k);

}  // namespace flatmoor
