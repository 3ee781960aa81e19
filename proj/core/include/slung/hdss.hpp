#pragma once

// Hybrid-dynamics-informed state seeding.
//
// A goal configuration at a waypoint is propagated K steps backwards in time
// through per-phase affine kinematic-inversion maps on the stacked flat
// outputs
//
//   payload   xi_l = [x_l, v_l, a_l, j_l]   (driven by sampled snap, taut)
//   quadrotor xi_q = [x_q, v_q, a_q]        (driven by sampled jerk, slack)
//
//   xi_l(t-1) = A xi_l(t) + B s + C
//   xi_q(t-1) = D xi_q(t) + E j + F
//
// and the earliest state of the chain becomes the episode start.

#include "slung/dynamics.hpp"
#include "slung/rng.hpp"
#include "slung/tracks.hpp"

#include <optional>
#include <vector>

namespace slung {

struct FlatChain {
  Vec3 x_l = Vec3::Zero();
  Vec3 v_l = Vec3::Zero();
  Vec3 a_l = Vec3::Zero();
  Vec3 j_l = Vec3::Zero();
  Vec3 x_q = Vec3::Zero();
  Vec3 v_q = Vec3::Zero();
  Vec3 a_q = Vec3::Zero();
  CablePhase phase = CablePhase::kTaut;
  int step_index = 0;

  // Rows x, v, a, j; columns are world axes.
  Eigen::Matrix<double, 4, 3> payload_block() const;
  Eigen::Matrix3d quad_block() const;
  void set_payload_block(const Eigen::Matrix<double, 4, 3>& block);
  void set_quad_block(const Eigen::Matrix3d& block);

  bool finite() const;
};

struct SampleRange {
  double lo = 0.0;
  double hi = 0.0;

  Vec3 draw(Rng& rng) const;
  bool well_ordered() const { return lo <= hi; }
};

struct SeedConfig {
  int horizon = 60;    // K
  double dt = 0.01;    // s
  SampleRange snap{-2.0, 2.0};           // s_l per taut backstep, m/s^4
  SampleRange slack_jerk{-10.0, 10.0};   // j_q per slack backstep, m/s^3
  SampleRange goal_velocity{-3.0, 3.0};  // v_l at the goal, m/s
  SampleRange goal_accel{-5.0, 5.0};     // a_l at the goal, m/s^2
  SampleRange goal_jerk{-2.0, 2.0};      // j_l at the goal, m/s^3
  // Half angle of the cone of payload directions around -z of the target
  // frame; pi/2 is the full lower hemisphere, 0 pins the payload below.
  double payload_cone_half_angle = kPi / 2.0;
  double tension_epsilon = 0.2;  // m/s^2, "a_l - g == 0" threshold
  double drift_tolerance = 0.05;  // fraction of l
  double rate_limit_factor = 1.5;  // |omega| <= factor * omega_max
  int max_resamples = 20;
  Workspace workspace;

  void validate() const;
  // All sampling ranges and the payload cone collapsed to zero.
  static SeedConfig degenerate();
};

// Per-phase backward maps for one axis.
struct PayloadMap {
  Eigen::Matrix4d A;
  Eigen::Vector4d B;  // snap column (zero in the slack phase)
  Eigen::Vector4d C;  // multiplies the gravity component of the axis
};

struct QuadMap {
  Eigen::Matrix3d D;
  Eigen::Vector3d E;  // jerk column (zero in the taut phase)
};

PayloadMap taut_payload_map(double dt);
PayloadMap slack_payload_map(double dt);
QuadMap taut_quad_map(double dt);
QuadMap slack_quad_map(double dt);

// Goal chain at the waypoint (step index K).
FlatChain sample_goal_chain(const Waypoint& waypoint, const SeedConfig& cfg,
                            const PhysicalParams& params, Rng& rng);

// Taut backstep; std::nullopt signals a phase switch (|a_l - g| < eps after
// the step), in which case no state is produced.
std::optional<FlatChain> backstep_taut(const FlatChain& chain, const Vec3& snap,
                                       const SeedConfig& cfg, const PhysicalParams& params);

FlatChain backstep_slack(const FlatChain& chain, const Vec3& quad_jerk, const SeedConfig& cfg,
                         const PhysicalParams& params);

enum class PhaseSwitch { kStay, kToSlack, kToTaut };

PhaseSwitch detect_backward_phase_switch(const FlatChain& chain, const PhysicalParams& params,
                                         double tension_epsilon = 0.2);

// Body z along a_q - g, heading from `yaw`. Throws SingularAttitude when
// |a_q - g| <= 1e-6.
Mat3 derive_attitude(const Vec3& a_q, double yaw, const PhysicalParams& params);

// Body-frame rates from the log map of R_prev^T R_next. Throws
// AmbiguousRotation when the relative angle reaches pi - 1e-6.
Vec3 derive_body_rates(const Mat3& R_prev, const Mat3& R_next, double dt);

// One backward propagation, in forward-time order (index 0 is the seed).
struct SeedTrace {
  std::vector<FlatChain> chain;
  std::vector<Mat3> attitudes;
  SystemState state;
  double max_drift = 0.0;
  int phase_switches = 0;
  bool valid = false;
  std::string reject_reason;
};

SeedTrace seed_attempt(const Waypoint& waypoint, const SeedConfig& cfg,
                       const PhysicalParams& params, Rng& rng);

struct SeededEpisodeState {
  SystemState state;
  double max_drift = 0.0;
  int phase_switches = 0;
  int resamples = 0;
};

// Up to 1 + max_resamples attempts; throws SeedingFailure when all fail.
SeededEpisodeState generate_seed(const Waypoint& waypoint, const SeedConfig& cfg,
                                 const PhysicalParams& params, Rng& rng);

// Forward replay of a trace: thrust from the chain accelerations and body
// rates from consecutive attitudes, integrated with hybrid_step. Reports the
// largest position gap to the backward chain.
struct ForwardCheck {
  double max_quad_divergence = 0.0;     // m
  double max_payload_divergence = 0.0;  // m
  double final_quad_divergence = 0.0;   // m, at the goal
};
ForwardCheck forward_verify(const SeedTrace& trace, const SeedConfig& cfg,
                            const PhysicalParams& params);

// Derivatives of n = u/|u| for u = a_l - g with u' = j, u'' = s.
struct UnitDerivatives {
  Vec3 n, n_dot, n_ddot;
};
UnitDerivatives unit_vector_derivatives(const Vec3& u, const Vec3& u_dot, const Vec3& u_ddot);

}  // namespace slung
