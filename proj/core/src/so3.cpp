#include "slung/so3.hpp"

#include <algorithm>
#include <cmath>

namespace slung {

std::string_view to_string(CablePhase phase) {
  return phase == CablePhase::kTaut ? "taut" : "slack";
}

bool Workspace::contains(const Vec3& p) const {
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

Workspace Workspace::shrunk(double margin) const {
  Workspace w;
  w.lo = lo.array() + margin;
  w.hi = hi.array() - margin;
  return w;
}

Vec3 Workspace::clamp(const Vec3& p) const { return p.cwiseMax(lo).cwiseMin(hi); }

ParseError::ParseError(std::string source, int line, std::string field, const std::string& what)
    : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
            (field.empty() ? std::string() : " [" + field + "]") + ": " + what),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

bool all_finite(const Vec3& v) { return v.allFinite(); }
bool all_finite(const Mat3& m) { return m.allFinite(); }

}  // namespace slung

namespace slung::so3 {

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Vec3 log(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Mat3 exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-300) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

double geodesic_angle(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Mat3 orthonormalize(const Mat3& r) {
  Vec3 z = r.col(2).normalized();
  Vec3 x = r.col(0) - z.dot(r.col(0)) * z;
  x.normalize();
  Mat3 out;
  out.col(0) = x;
  out.col(1) = z.cross(x);
  out.col(2) = z;
  return out;
}

double orthonormality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 rot_x(double angle) { return Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rot_z(double angle) { return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix(); }

}  // namespace slung::so3
