#include "flatmoor/bspline.hpp"

#include <cmath>
#include <stdexcept>

namespace flatmoor {

KnotVector KnotVector::clamped_uniform(int degree, int n_ctrl, double t_f) {
  if (degree < 1) throw std::invalid_argument("knot vector: degree must be >= 1");
  if (n_ctrl < degree + 1) {
    throw std::invalid_argument("knot vector: need at least degree+1 control points");
  }
  if (!(t_f > 0.0)) throw std::invalid_argument("knot vector: horizon must be positive");

  KnotVector kv;
  kv.degree = degree;
  const int n_knots = n_ctrl + degree + 1;
  const int n_interior = n_knots - 2 * (degree + 1);
  kv.knots.reserve(n_knots);
  for (int i = 0; i <= degree; ++i) kv.knots.push_back(0.0);
  for (int i = 1; i <= n_interior; ++i) {
    kv.knots.push_back(t_f * i / (n_interior + 1));
  }
  for (int i = 0; i <= degree; ++i) kv.knots.push_back(t_f);
  return kv;
}

std::vector<std::string> KnotVector::validate() const {
  std::vector<std::string> issues;
  if (degree < 1) issues.push_back("degree must be >= 1");
  if (static_cast<int>(knots.size()) < 2 * (degree + 1)) {
    issues.push_back("too few knots for a clamped vector");
    return issues;
  }
  for (size_t i = 1; i < knots.size(); ++i) {
    if (knots[i] < knots[i - 1]) {
      issues.push_back("knots must be non-decreasing");
      break;
    }
  }
  for (int i = 0; i <= degree; ++i) {
    if (knots[i] != knots[0]) issues.push_back("first degree+1 knots must coincide");
    if (knots[knots.size() - 1 - i] != knots.back()) {
      issues.push_back("last degree+1 knots must coincide");
    }
  }
  if (!(knots.back() > knots.front())) issues.push_back("horizon must be positive");
  return issues;
}

namespace {

void check_eval_args(int i, int d, double t, const KnotVector& kv) {
  if (t < kv.knots.front() || t > kv.knots.back()) {
    throw std::out_of_range("basis: time outside the knot span");
  }
  if (d < 0 || i < 0 || i + d + 1 >= static_cast<int>(kv.knots.size())) {
    throw std::out_of_range("basis: index out of range");
  }
}

// Recursion core without argument checks (indices are generated in-range).
double basis_rec(int i, int d, double t, const KnotVector& kv) {
  const auto& u = kv.knots;
  if (d == 0) {
    if (u[i] <= t && t < u[i + 1]) return 1.0;
    // Closed-at-right convention: the final positive-length interval also
    // contains t_f, otherwise every basis would vanish there.
    if (t == u.back() && u[i + 1] == u.back() && u[i] < u[i + 1]) return 1.0;
    return 0.0;
  }
  double value = 0.0;
  const double den_l = u[i + d] - u[i];
  if (den_l > 0.0) value += (t - u[i]) / den_l * basis_rec(i, d - 1, t, kv);
  const double den_r = u[i + d + 1] - u[i + 1];
  if (den_r > 0.0) {
    value += (u[i + d + 1] - t) / den_r * basis_rec(i + 1, d - 1, t, kv);
  }
  return value;
}

double basis_derivative_rec(int i, int d, int k, double t, const KnotVector& kv) {
  if (k == 0) return basis_rec(i, d, t, kv);
  const auto& u = kv.knots;
  double value = 0.0;
  const double den_l = u[i + d] - u[i];
  if (den_l > 0.0) {
    value += d / den_l * basis_derivative_rec(i, d - 1, k - 1, t, kv);
  }
  const double den_r = u[i + d + 1] - u[i + 1];
  if (den_r > 0.0) {
    value -= d / den_r * basis_derivative_rec(i + 1, d - 1, k - 1, t, kv);
  }
  return value;
}

}  // namespace

double basis(int i, int d, double t, const KnotVector& kv) {
  check_eval_args(i, d, t, kv);
  return basis_rec(i, d, t, kv);
}

double basis_derivative(int i, int d, int k, double t, const KnotVector& kv) {
  if (k > d) throw std::invalid_argument("basis_derivative: order exceeds degree");
  if (k < 0) throw std::invalid_argument("basis_derivative: negative order");
  check_eval_args(i, d, t, kv);
  return basis_derivative_rec(i, d, k, t, kv);
}

Eigen::Vector3d SplineTrajectory::eval(double t, int k) const {
  const int n = kv.num_basis();
  if (ctrl.rows() != n) {
    throw std::invalid_argument("spline eval: control point count does not match knots");
  }
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const double b = basis_derivative(i, kv.degree, k, t, kv);
    if (b != 0.0) out += b * ctrl.row(i).transpose();
  }
  return out;
}

Eigen::MatrixXd basis_matrix(const KnotVector& kv, const std::vector<double>& times,
                             int k) {
  const int n = kv.num_basis();
  Eigen::MatrixXd B(static_cast<Eigen::Index>(times.size()), n);
  for (size_t row = 0; row < times.size(); ++row) {
    for (int i = 0; i < n; ++i) {
      B(static_cast<Eigen::Index>(row), i) = basis_derivative(i, kv.degree, k, times[row], kv);
    }
  }
  return B;
}

}  // namespace flatmoor
