#pragma once

#include "slung/types.hpp"

namespace slung::so3 {

Mat3 hat(const Vec3& w);
Vec3 vee(const Mat3& m);

// Rotation vector of R (axis * angle), angle in [0, pi].
Vec3 log(const Mat3& r);
Mat3 exp(const Vec3& w);

// Geodesic angle arccos((tr R - 1) / 2), clamped into [0, pi].
double geodesic_angle(const Mat3& r);

// Gram-Schmidt on the columns, keeping the z column direction first.
Mat3 orthonormalize(const Mat3& r);

double orthonormality_error(const Mat3& r);

Mat3 rot_x(double angle);
Mat3 rot_z(double angle);

}  // namespace slung::so3
