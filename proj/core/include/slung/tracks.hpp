#pragma once

#include "slung/rng.hpp"
#include "slung/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace slung {

enum class WaypointKind { kUpright, kInverted };

std::string_view to_string(WaypointKind kind);
WaypointKind waypoint_kind_from_string(std::string_view text);

// SE(3) target. The attitude quaternion is the stored representation; the
// rotation matrix is derived from it so that file round-trips are bit-exact.
struct Waypoint {
  Vec3 position = Vec3::Zero();
  Quat attitude = Quat::Identity();
  WaypointKind kind = WaypointKind::kUpright;
  double yaw = 0.0;

  Mat3 rotation() const { return attitude.toRotationMatrix(); }
  Vec3 x_axis() const { return rotation().col(0); }
  Vec3 z_axis() const { return rotation().col(2); }

  bool operator==(const Waypoint& other) const;
};

// Target rotation for a waypoint kind: upright is a yaw about +z, inverted
// adds a half turn about the yawed x axis (z down, x at heading `yaw`).
Quat waypoint_attitude(WaypointKind kind, double yaw);

// Throws ValidationError when `position` lies outside `workspace`.
Waypoint make_waypoint(const Vec3& position, WaypointKind kind, double yaw,
                       const Workspace& workspace = {});

struct Track {
  std::string name;
  std::vector<Waypoint> waypoints;
  // Hover start for evaluation; workspace centre when absent.
  std::optional<Vec3> start;
  std::map<std::string, std::string> metadata;

  bool operator==(const Track& other) const;
};

struct TrackGenConfig {
  Workspace workspace;
  // Relative bounding volume for the next waypoint.
  Vec3 offset_lo{-2.0, -2.0, 0.5};
  Vec3 offset_hi{2.0, 2.0, 3.0};
  double inverted_fraction = 0.5;
  // Resampled waypoints are clamped into the workspace shrunk by this margin.
  double clamp_margin = 0.5;
};

// Next training/evaluation waypoint relative to `current`. Upright waypoints
// face the direction of travel; inverted ones get a uniform yaw.
Waypoint resample_waypoint(const Waypoint& current, Rng& rng, const TrackGenConfig& cfg);

// The raw offset drawn by resample_waypoint, before clamping. Exposed so the
// generator can be replayed in tests.
struct ResampleDraw {
  Vec3 offset;
  bool inverted;
  double yaw;
};
ResampleDraw draw_resample(Rng& rng, const TrackGenConfig& cfg);

Track random_track(int count, Rng& rng, const TrackGenConfig& cfg = {});

enum class NamedTrack { kRibbon, kCroissant, kMultiHeading };

NamedTrack named_track_from_string(std::string_view text);
Track named_track(NamedTrack name, const Workspace& workspace = {});

// Rejects non-unit quaternions, inverted waypoints whose z axis is not down,
// empty tracks and out-of-workspace positions.
void validate_track(const Track& track, const Workspace& workspace = {});

void save_track(const Track& track, const std::filesystem::path& path);
std::string track_to_string(const Track& track);
Track load_track(const std::filesystem::path& path, const Workspace& workspace = {});
Track track_from_string(const std::string& text, const std::string& source = "<string>",
                        const Workspace& workspace = {});

// Resolves a CLI track spec: a path, `name:<Ribbon|Croissant|MultiHeading>`
// or `random:<n>:<seed>`.
Track resolve_track_spec(const std::string& spec, const TrackGenConfig& cfg = {});

}  // namespace slung
