#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mingle {

using Vec2 = Eigen::Vector2d;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ordered list of 2-D coordinates in meters, one per measurement point.
using Trajectory = std::vector<Vec2>;

/// A steady course: measurement-point indices [first, last], 0-based, inclusive.
struct Course {
  int first = 0;
  int last = 0;

  int length() const { return last - first + 1; }
  bool operator==(const Course&) const = default;
};

}  // namespace mingle
