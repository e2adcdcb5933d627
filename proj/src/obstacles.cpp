#include "flatmoor/obstacles.hpp"

#include <cmath>
#include <stdexcept>

namespace flatmoor {

std::vector<std::string> RectObstacle::validate() const {
  std::vector<std::string> issues;
  if (!(dx > 0.0)) issues.push_back("obstacle half-extent dx must be positive");
  if (!(dy > 0.0)) issues.push_back("obstacle half-extent dy must be positive");
  if (p < 1) issues.push_back("obstacle approximation power must be >= 1");
  if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(alpha)) {
    issues.push_back("obstacle pose must be finite");
  }
  return issues;
}

namespace {

struct LocalOffset {
  double a, b;  // query point in the obstacle frame
};

LocalOffset to_local(const RectObstacle& o, double x, double y) {
  const double c = std::cos(o.alpha), s = std::sin(o.alpha);
  const double rx = x - o.x0, ry = y - o.y0;
  return {c * rx + s * ry, -s * rx + c * ry};
}

}  // namespace

double rect_value(const RectObstacle& o, double x, double y) {
  const LocalOffset l = to_local(o, x, y);
  const double A = std::abs(l.a) / o.dx;
  const double B = std::abs(l.b) / o.dy;
  const double m = std::max(A, B);
  if (m == 0.0) return 0.0;
  // Factor out the larger normalized offset so the 2p-th powers stay <= 1.
  const double sum =
      std::pow(A / m, 2 * o.p) + std::pow(B / m, 2 * o.p);
  return m * m * std::pow(sum, 1.0 / o.p);
}

Eigen::Vector2d rect_gradient(const RectObstacle& o, double x, double y) {
  const LocalOffset l = to_local(o, x, y);
  const double A = std::abs(l.a) / o.dx;
  const double B = std::abs(l.b) / o.dy;
  const double m = std::max(A, B);
  if (m == 0.0) return Eigen::Vector2d::Zero();  // p-th root kink at the center

  const double An = A / m, Bn = B / m;
  const double sum = std::pow(An, 2 * o.p) + std::pow(Bn, 2 * o.p);
  // d f / d a = 2 m * sum^{(1-p)/p} * sign(a) * An^{2p-1} / dx, and likewise
  // for b; obtained by scaling the direct power-rule derivative by m.
  const double common = 2.0 * m * std::pow(sum, (1.0 - o.p) / o.p);
  const double ga =
      common * (l.a >= 0.0 ? 1.0 : -1.0) * std::pow(An, 2 * o.p - 1) / o.dx;
  const double gb =
      common * (l.b >= 0.0 ? 1.0 : -1.0) * std::pow(Bn, 2 * o.p - 1) / o.dy;

  const double c = std::cos(o.alpha), s = std::sin(o.alpha);
  return {ga * c - gb * s, ga * s + gb * c};
}

double smooth_max(const std::vector<double>& values, int p) {
  if (values.empty()) throw std::invalid_argument("smooth_max: empty value list");
  if (p < 1) throw std::invalid_argument("smooth_max: power must be >= 1");
  double vmax = 0.0;
  for (double v : values) {
    if (v < 0.0) throw std::invalid_argument("smooth_max: negative value");
    vmax = std::max(vmax, v);
  }
  if (vmax == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += std::pow(v / vmax, p);
  return vmax * std::pow(sum, 1.0 / p);
}

Eigen::VectorXd constraint_values(const ObstacleSet& obs, double x, double y) {
  Eigen::VectorXd h(obs.q());
  for (int i = 0; i < obs.q(); ++i) {
    h(i) = 1.0 - rect_value(obs.rectangles[i], x, y);
  }
  return h;
}

Eigen::MatrixXd constraint_gradient(const ObstacleSet& obs, double x, double y) {
  Eigen::MatrixXd G(obs.q(), 2);
  for (int i = 0; i < obs.q(); ++i) {
    G.row(i) = -rect_gradient(obs.rectangles[i], x, y).transpose();
  }
  return G;
}

}  // namespace flatmoor
