#pragma once

// Forward (+dt) counterparts of the backward flat-output maps, used to undo a
// backstep. Rows that the backward maps overwrite (a_q while taut, a_l and
// j_l while slack) are not state and are supplied from the known chain.

#include <Eigen/Dense>

namespace oracle {

using PayloadBlock = Eigen::Matrix<double, 4, 3>;

inline Eigen::Matrix4d taylor_forward4(double dt) {
  Eigen::Matrix4d m;
  m << 1.0, dt, dt * dt / 2.0, dt * dt * dt / 6.0,
       0.0, 1.0, dt, dt * dt / 2.0,
       0.0, 0.0, 1.0, dt,
       0.0, 0.0, 0.0, 1.0;
  return m;
}

// Taut payload: xi(t) = A^-1 (xi(t-1) - B s), A^-1 from a numerical LU.
inline PayloadBlock invert_taut_payload(const Eigen::Matrix4d& A, const Eigen::Vector4d& B,
                                        const PayloadBlock& prev, const Eigen::Vector3d& snap) {
  return A.partialPivLu().solve(prev - B * snap.transpose());
}

// Position/velocity rows of a backward step with known acceleration a(t):
//   [x; v](t-1) = [[1, -dt], [0, 1]] [x; v](t) + [dt^2/2; -dt] a(t)
inline Eigen::Matrix<double, 2, 3> invert_position_velocity(const Eigen::Matrix<double, 2, 3>& prev,
                                                            const Eigen::Vector3d& accel_next,
                                                            double dt) {
  Eigen::Matrix2d D;
  D << 1.0, -dt, 0.0, 1.0;
  const Eigen::Vector2d col(dt * dt / 2.0, -dt);
  return D.partialPivLu().solve(prev - col * accel_next.transpose());
}

// Slack quadrotor: xi(t) = D^-1 (xi(t-1) - E j).
inline Eigen::Matrix3d invert_slack_quad(const Eigen::Matrix3d& D, const Eigen::Vector3d& E,
                                         const Eigen::Matrix3d& prev, const Eigen::Vector3d& jerk) {
  return D.partialPivLu().solve(prev - E * jerk.transpose());
}

}  // namespace oracle
