#pragma once

// Brute-force traversal predicate written against raw vectors and
// quaternions rather than the library's rotation helpers.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>

namespace oracle {

struct TraversalCase {
  Eigen::Vector3d prev_x_q;
  Eigen::Vector3d next_x_q;
  Eigen::Quaterniond body;    // attitude after the step
  Eigen::Vector3d gate;       // waypoint position
  Eigen::Quaterniond target;  // waypoint attitude
};

inline double quaternion_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const double dot = std::abs(a.normalized().dot(b.normalized()));
  return 2.0 * std::acos(std::min(1.0, dot));
}

inline bool traversal_predicate(const TraversalCase& c, double proximity, double tolerance) {
  const Eigen::Vector3d axis = c.target.normalized() * Eigen::Vector3d::UnitX();
  double before = 0.0, after = 0.0;
  for (int i = 0; i < 3; ++i) {
    before += (c.prev_x_q[i] - c.gate[i]) * axis[i];
    after += (c.next_x_q[i] - c.gate[i]) * axis[i];
  }
  const bool crossed = before < 0.0 && !(after < 0.0);
  const bool close = (c.gate - c.next_x_q).norm() < proximity;
  const bool aligned = quaternion_angle(c.body, c.target) < tolerance;
  return crossed && close && aligned;
}

}  // namespace oracle
