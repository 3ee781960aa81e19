#include "slung/tracks.hpp"

#include "slung/so3.hpp"

#include <cmath>
#include <string>

namespace slung {

std::string_view to_string(WaypointKind kind) {
  return kind == WaypointKind::kUpright ? "upright" : "inverted";
}

WaypointKind waypoint_kind_from_string(std::string_view text) {
  if (text == "upright") return WaypointKind::kUpright;
  if (text == "inverted") return WaypointKind::kInverted;
  throw InvalidArgument("unknown waypoint kind '" + std::string(text) + "'");
}

bool Waypoint::operator==(const Waypoint& other) const {
  return position == other.position && attitude.coeffs() == other.attitude.coeffs() &&
         kind == other.kind && yaw == other.yaw;
}

bool Track::operator==(const Track& other) const {
  return name == other.name && waypoints == other.waypoints && start == other.start &&
         metadata == other.metadata;
}

Quat waypoint_attitude(WaypointKind kind, double yaw) {
  const Quat heading(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
  if (kind == WaypointKind::kUpright) return heading;
  // Half turn about the body x axis after the yaw: x stays at the heading, z points down.
  return (heading * Quat(Eigen::AngleAxisd(kPi, Vec3::UnitX()))).normalized();
}

Waypoint make_waypoint(const Vec3& position, WaypointKind kind, double yaw,
                       const Workspace& workspace) {
  if (!position.allFinite() || !workspace.contains(position)) {
    throw ValidationError("waypoint position outside the workspace");
  }
  return Waypoint{position, waypoint_attitude(kind, yaw), kind, yaw};
}

ResampleDraw draw_resample(Rng& rng, const TrackGenConfig& cfg) {
  ResampleDraw d;
  d.offset = rng.uniform3(cfg.offset_lo, cfg.offset_hi);
  d.inverted = rng.bernoulli(cfg.inverted_fraction);
  d.yaw = rng.uniform(0.0, 2.0 * kPi);
  return d;
}

Waypoint resample_waypoint(const Waypoint& current, Rng& rng, const TrackGenConfig& cfg) {
  const ResampleDraw d = draw_resample(rng, cfg);
  const Vec3 position = cfg.workspace.shrunk(cfg.clamp_margin).clamp(current.position + d.offset);
  const Vec3 travel = position - current.position;
  double yaw = d.yaw;
  if (!d.inverted) {
    yaw = travel.head<2>().norm() > 1e-9 ? std::atan2(travel.y(), travel.x()) : current.yaw;
  }
  const WaypointKind kind = d.inverted ? WaypointKind::kInverted : WaypointKind::kUpright;
  return make_waypoint(position, kind, yaw, cfg.workspace);
}

Track random_track(int count, Rng& rng, const TrackGenConfig& cfg) {
  if (count < 1) throw InvalidArgument("random_track: count must be >= 1");
  Track track;
  track.name = "random";
  track.start = cfg.workspace.center();
  Waypoint prev = make_waypoint(*track.start, WaypointKind::kUpright, 0.0, cfg.workspace);
  for (int i = 0; i < count; ++i) {
    prev = resample_waypoint(prev, rng, cfg);
    track.waypoints.push_back(prev);
  }
  return track;
}

NamedTrack named_track_from_string(std::string_view text) {
  if (text == "Ribbon") return NamedTrack::kRibbon;
  if (text == "Croissant") return NamedTrack::kCroissant;
  if (text == "MultiHeading") return NamedTrack::kMultiHeading;
  throw InvalidArgument("unknown named track '" + std::string(text) + "'");
}

namespace {

Track ribbon(const Workspace& ws) {
  // Straight run with a single inverted gate at the top of a hump.
  Track t;
  t.name = "Ribbon";
  t.start = Vec3(-4.5, 0.0, 3.0);
  t.waypoints = {
      make_waypoint({-2.0, 0.0, 3.5}, WaypointKind::kUpright, 0.0, ws),
      make_waypoint({0.0, 0.0, 4.5}, WaypointKind::kInverted, 0.0, ws),
      make_waypoint({2.0, 0.0, 3.5}, WaypointKind::kUpright, 0.0, ws),
  };
  return t;
}

Track croissant(const Workspace& ws) {
  // Half-ellipse arc of 11 gates; gates 4..6 are inverted in a row.
  Track t;
  t.name = "Croissant";
  t.start = Vec3(-5.5, -1.0, 2.5);
  constexpr int kCount = 11;
  for (int i = 0; i < kCount; ++i) {
    const double s = kPi * static_cast<double>(i) / (kCount - 1);
    const Vec3 p{-4.0 * std::cos(s), -1.0 + 3.0 * std::sin(s), 2.5 + 1.5 * std::sin(s)};
    // Tangent of the arc gives the heading.
    const double yaw = std::atan2(3.0 * std::cos(s), 4.0 * std::sin(s));
    const bool inverted = i >= 4 && i <= 6;
    t.waypoints.push_back(
        make_waypoint(p, inverted ? WaypointKind::kInverted : WaypointKind::kUpright, yaw, ws));
  }
  return t;
}

Track multi_heading(const Workspace& ws) {
  // Square circuit; inverted gates on the four sides, each entered from a
  // different direction.
  Track t;
  t.name = "MultiHeading";
  t.start = Vec3(-4.0, -4.0, 3.0);
  const double h = kPi / 2.0;
  t.waypoints = {
      make_waypoint({-2.0, -3.0, 3.5}, WaypointKind::kUpright, 0.0, ws),
      make_waypoint({0.5, -3.0, 4.5}, WaypointKind::kInverted, 0.0, ws),
      make_waypoint({3.0, -2.0, 3.5}, WaypointKind::kUpright, h, ws),
      make_waypoint({3.0, 0.5, 4.5}, WaypointKind::kInverted, h, ws),
      make_waypoint({2.0, 3.0, 3.5}, WaypointKind::kUpright, 2 * h, ws),
      make_waypoint({-0.5, 3.0, 4.5}, WaypointKind::kInverted, 2 * h, ws),
      make_waypoint({-3.0, 2.0, 3.5}, WaypointKind::kUpright, 3 * h, ws),
      make_waypoint({-3.0, -0.5, 4.5}, WaypointKind::kInverted, -h, ws),
      make_waypoint({-2.0, -2.5, 3.5}, WaypointKind::kUpright, 0.0, ws),
  };
  return t;
}

}  // namespace

Track named_track(NamedTrack name, const Workspace& workspace) {
  switch (name) {
    case NamedTrack::kRibbon:
      return ribbon(workspace);
    case NamedTrack::kCroissant:
      return croissant(workspace);
    case NamedTrack::kMultiHeading:
      return multi_heading(workspace);
  }
  throw InvalidArgument("named_track: bad enum");
}

void validate_track(const Track& track, const Workspace& workspace) {
  if (track.waypoints.empty()) throw ValidationError("track has no waypoints");
  for (std::size_t i = 0; i < track.waypoints.size(); ++i) {
    const Waypoint& w = track.waypoints[i];
    const std::string where = "waypoints[" + std::to_string(i) + "]";
    if (!w.position.allFinite() || !workspace.contains(w.position)) {
      throw ValidationError(where + ": position outside the workspace");
    }
    if (std::abs(w.attitude.norm() - 1.0) > 1e-9) {
      throw ValidationError(where + ": rotation is not orthonormal (|q| != 1)");
    }
    if (w.kind == WaypointKind::kInverted &&
        std::abs(w.z_axis().dot(-Vec3::UnitZ()) - 1.0) > 1e-9) {
      throw ValidationError(where + ": inverted waypoint z axis must point down");
    }
  }
  if (track.start && !workspace.contains(*track.start)) {
    throw ValidationError("track start outside the workspace");
  }
}

Track resolve_track_spec(const std::string& spec, const TrackGenConfig& cfg) {
  if (spec.rfind("name:", 0) == 0) {
    return named_track(named_track_from_string(spec.substr(5)), cfg.workspace);
  }
  if (spec.rfind("random:", 0) == 0) {
    const std::string rest = spec.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) {
      throw InvalidArgument("track spec 'random:<n>:<seed>' expected, got '" + spec + "'");
    }
    const int n = std::stoi(rest.substr(0, colon));
    const auto seed = std::stoull(rest.substr(colon + 1));
    Rng rng(seed);
    Track t = random_track(n, rng, cfg);
    t.name = spec;
    return t;
  }
  return load_track(spec, cfg.workspace);
}

}  // namespace slung
