#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace flatmoor {

/// Rotated-rectangle keep-out region, smoothed by an even-power p-norm.
/// dx, dy are half-extents: the boundary value f = 1 is reached at distance
/// dx along the rectangle's own x-axis.
struct RectObstacle {
  double x0 = 0.0;     // center north [m]
  double y0 = 0.0;     // center east [m]
  double dx = 1.0;     // half-extent along the local x-axis [m]
  double dy = 1.0;     // half-extent along the local y-axis [m]
  double alpha = 0.0;  // orientation [rad]
  int p = 2;           // approximation quality; corners sharpen as p grows

  std::vector<std::string> validate() const;
};

struct ObstacleSet {
  std::vector<RectObstacle> rectangles;
  int q() const { return static_cast<int>(rectangles.size()); }
};

/// f(x, y) = [ (a/dx)^{2p} + (b/dy)^{2p} ]^{1/p} in the obstacle frame
/// (a, b) = R(alpha)^T ((x,y) - center). Zero at the center, 1 on the
/// smoothed boundary, > 1 outside; scaled internally so large offsets
/// cannot overflow the even powers.
double rect_value(const RectObstacle& o, double x, double y);

/// d f / d (x, y). At the center (f = 0) the p-th root is singular; the
/// gradient is defined as zero there.
Eigen::Vector2d rect_gradient(const RectObstacle& o, double x, double y);

/// p-norm upper approximation of max(values): max(v) <= result <=
/// l^{1/p} * max(v) for l values. Throws std::invalid_argument on an empty
/// list, negative entries, or p < 1.
double smooth_max(const std::vector<double>& values, int p);

/// h_i = 1 - f_i(x, y); the point is feasible iff every h_i <= 0.
Eigen::VectorXd constraint_values(const ObstacleSet& obs, double x, double y);

/// Rows are d h_i / d (x, y) = -grad f_i.
Eigen::MatrixXd constraint_gradient(const ObstacleSet& obs, double x, double y);

}  // namespace flatmoor
