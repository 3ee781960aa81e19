#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace slung {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kStandardGravity = 9.81;
inline constexpr double kPi = 3.14159265358979323846;

enum class CablePhase { kTaut, kSlack };

std::string_view to_string(CablePhase phase);

// Axis-aligned box; the flight workspace W.
struct Workspace {
  Vec3 lo{-8.0, -8.0, 0.1};
  Vec3 hi{8.0, 8.0, 8.0};

  bool contains(const Vec3& p) const;
  // Box shrunk by `margin` on every face.
  Workspace shrunk(double margin) const;
  Vec3 clamp(const Vec3& p) const;
  Vec3 center() const { return 0.5 * (lo + hi); }
};

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

class SingularAttitude : public Error {
 public:
  using Error::Error;
};

class AmbiguousRotation : public Error {
 public:
  using Error::Error;
};

class SeedingFailure : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

// Parse failure carrying the offending line (1-based, 0 if unknown) and field.
class ParseError : public Error {
 public:
  ParseError(std::string source, int line, std::string field, const std::string& what);

  int line() const { return line_; }
  const std::string& field() const { return field_; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  int line_;
  std::string field_;
};

bool all_finite(const Vec3& v);
bool all_finite(const Mat3& m);

}  // namespace slung
