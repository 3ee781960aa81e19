#pragma once

#include "slung/dynamics.hpp"
#include "slung/hdss.hpp"
#include "slung/rng.hpp"
#include "slung/tracks.hpp"

#include <array>
#include <optional>
#include <vector>

namespace slung {

inline constexpr int kObservationSize = 37;
inline constexpr int kActionSize = 4;

// Scaled observation:
//   [0,3)   dx1 / k_q       next waypoint relative to the quadrotor
//   [3,6)   dx2 / k_q       look-ahead waypoint
//   [6,9)   v_q / k_v
//   [9,18)  R_BT row-major  (R_TW^T R_BW)
//   [18,21) x_l^B / k_l     payload in body frame
//   [21,24) v_l / k_v
//   [24,33) R_TW row-major
//   [33,37) previous normalized action
using Observation = std::array<double, kObservationSize>;

struct ObservationLayout {
  static constexpr int kDx1 = 0;
  static constexpr int kDx2 = 3;
  static constexpr int kVq = 6;
  static constexpr int kRbt = 9;
  static constexpr int kPayloadBody = 18;
  static constexpr int kVl = 21;
  static constexpr int kRtw = 24;
  static constexpr int kPrevAction = 33;
};

struct ActionCommand {
  Vec4 normalized = Vec4::Zero();
  PhysicalCommand physical;
};

struct RewardBreakdown {
  double r_target = 0.0;
  double r_safe = 0.0;
  double r_crash = 0.0;
  double r_smooth = 0.0;
  bool traversed = false;
  double pos_err = 0.0;
  double att_err = 0.0;

  double total() const { return r_target + r_safe + r_crash + r_smooth; }
};

enum class ResetMode { kAuto, kHdss, kHover };

struct EnvConfig {
  // Reward.
  double lambda1 = 10.0;
  double lambda2 = 10.0;
  double lambda3 = 1e-4;
  double sigma_p = 3.0;
  double sigma_theta = 2.0;
  double completion_bonus = 5.0;        // C
  double proximity = 0.75;              // L, m
  double attitude_tolerance = 25.0 * kPi / 180.0;  // eps_theta, rad
  double r_exceed = 3.0;
  double r_bound = 10.0;
  // Observation scaling.
  Vec3 k_q{4.0, 4.0, 3.0};
  Vec3 k_v{5.0, 5.0, 5.0};
  Vec3 k_l{0.5, 0.5, 0.5};
  Workspace workspace;
  double dt = 0.01;
  // Episode initialization.
  double hdss_fraction = 0.9;
  double spawn_margin = 0.5;
  ResetMode reset_mode = ResetMode::kAuto;
  // Domain randomization of m_l and l (uniform +-dr_fraction).
  bool domain_randomization = true;
  double dr_fraction = 0.2;
  int max_episode_steps = 1500;
  TrackGenConfig track_gen;
  SeedConfig seed;
  PhysicalParams physics;

  void validate() const;
};

Observation build_observation(const SystemState& state, const Waypoint& next,
                              const Waypoint& lookahead, const Vec4& prev_action,
                              const EnvConfig& cfg);

ActionCommand map_action(const Vec4& a_norm, const PhysicalParams& params);

struct TraversalInfo {
  bool traversed = false;
  bool crossed_plane = false;
  double pos_err = 0.0;  // m, after the step
  double att_err = 0.0;  // rad, after the step
};

// Geodesic angle between body and target rotation.
double attitude_error(const Mat3& R_body, const Mat3& R_target);

TraversalInfo check_traversal(const SystemState& prev, const SystemState& next,
                              const Waypoint& waypoint, const EnvConfig& cfg);

// Payload position in the body frame.
Vec3 payload_in_body(const SystemState& state);

RewardBreakdown compute_reward(const SystemState& prev, const SystemState& next,
                               const Vec4& a_prev, const Vec4& a_now,
                               const TraversalInfo& traversal, const EnvConfig& cfg);

struct ResetResult {
  SystemState state;
  ResetMode used = ResetMode::kHover;  // never kAuto
  std::optional<SeededEpisodeState> seed;
};

// Hdss seeds from `waypoint` (hover fallback on seeding failure); Hover
// draws a position uniformly in the workspace shrunk by spawn_margin; Auto
// picks Hdss with probability hdss_fraction.
ResetResult reset_state(ResetMode mode, const Waypoint& waypoint, const EnvConfig& cfg,
                        const PhysicalParams& params, Rng& rng);

PhysicalParams randomize_params(const PhysicalParams& params, Rng& rng, double dr_fraction);

// Current target plus look-ahead. Either a fixed track (evaluation) or an
// endless stream of resampled waypoints (training).
class WaypointQueue {
 public:
  static WaypointQueue fixed(Track track);
  static WaypointQueue resampling(const Waypoint& first, const TrackGenConfig& cfg, Rng& rng);

  const Waypoint& current() const;
  // Next waypoint after current(); duplicates current() at the end of a track.
  const Waypoint& lookahead() const;
  void advance(Rng& rng);
  bool finished() const;
  int traversed() const { return traversed_; }

 private:
  std::vector<Waypoint> waypoints_;
  std::size_t cursor_ = 0;
  bool resample_ = false;
  TrackGenConfig gen_;
  int traversed_ = 0;
};

struct StepInfo {
  StepEvents events;
  bool crashed = false;
  bool truncated = false;
  bool integration_failure = false;
  bool track_complete = false;
};

struct StepOutcome {
  Observation observation;
  RewardBreakdown reward;
  bool done = false;
  StepInfo info;
};

struct EpisodeStats {
  double total_reward = 0.0;
  int length = 0;
  int traversals = 0;
};

// One environment instance with its own rng stream.
class Environment {
 public:
  Environment(EnvConfig cfg, Rng rng);

  // Training reset: anchor drawn in the workspace, waypoints resampled from it.
  Observation reset();
  // Evaluation reset: hover at the track start with fixed physical params.
  Observation reset_on_track(const Track& track, const PhysicalParams& params);
  // Start from an explicit state with a resampling queue from `first`.
  Observation reset_to(const SystemState& state, const Waypoint& first);

  // step_env: map action, hybrid step, traversal/reward, cursor advance,
  // termination.
  StepOutcome step(const Vec4& a_norm);

  const SystemState& state() const { return state_; }
  const WaypointQueue& queue() const { return queue_; }
  const PhysicalParams& params() const { return params_; }
  const EnvConfig& config() const { return cfg_; }
  const Vec4& previous_action() const { return prev_action_; }
  const EpisodeStats& episode() const { return episode_; }
  ResetMode last_reset_mode() const { return last_reset_; }
  Observation observe() const;
  Rng& rng() { return rng_; }

 private:
  EnvConfig cfg_;
  Rng rng_;
  PhysicalParams params_;
  SystemState state_;
  WaypointQueue queue_;
  Vec4 prev_action_ = Vec4::Zero();
  EpisodeStats episode_;
  ResetMode last_reset_ = ResetMode::kHover;
};

}  // namespace slung
