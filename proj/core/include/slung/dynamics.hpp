#pragma once

// Hybrid taut/slack dynamics of a quadrotor carrying a cable-suspended
// payload. World frame is Z-up; gravity is [0, 0, -g].
//
// Taut phase state is carried internally as (x_l, v_l, rho, rho_dot, R, omega)
// with rho the unit vector from quadrotor to payload; the quadrotor position
// follows from x_q = x_l - l * rho. Slack phase integrates both bodies
// independently (quadrotor under thrust, payload ballistic).

#include "slung/types.hpp"

#include <optional>

namespace slung {

struct PhysicalParams {
  double quad_mass = 0.315;     // kg
  double payload_mass = 0.035;  // kg
  double cable_length = 0.4;    // m
  Mat3 inertia = Eigen::Vector3d(1.4e-3, 1.4e-3, 2.2e-3).asDiagonal();  // kg m^2
  double gravity = kStandardGravity;                                     // m/s^2
  double max_thrust_accel = 3.5 * kStandardGravity;                      // m/s^2
  Vec3 max_body_rate{10.0, 10.0, 3.0};                                   // rad/s
  Vec3 rate_gain{20.0, 20.0, 20.0};                                      // 1/s

  double total_mass() const { return quad_mass + payload_mass; }
  Vec3 gravity_vector() const { return {0.0, 0.0, -gravity}; }
  // Mass-normalized collective thrust that holds the coupled system still.
  double hover_thrust_accel() const { return total_mass() * gravity / quad_mass; }

  // Throws InvalidArgument on non-positive masses/lengths or a non-SPD inertia.
  void validate() const;
};

struct SystemState {
  Vec3 x_q = Vec3::Zero();
  Vec3 v_q = Vec3::Zero();
  Mat3 R = Mat3::Identity();  // body -> world
  Vec3 omega = Vec3::Zero();  // body rates
  Vec3 x_l = Vec3::Zero();
  Vec3 v_l = Vec3::Zero();
  CablePhase phase = CablePhase::kTaut;
  double t = 0.0;

  bool finite() const;
};

struct CableCoords {
  Vec3 rho = -Vec3::UnitZ();
  Vec3 rho_dot = Vec3::Zero();
};

// Physical command: collective thrust acceleration and body-rate setpoint.
struct PhysicalCommand {
  double thrust_accel = 0.0;
  Vec3 body_rate = Vec3::Zero();
};

// Cable direction and its rate from the body positions/velocities; the
// tangential part of the relative velocity only.
CableCoords cable_coords(const SystemState& state);

// World-frame thrust force m_q * T_cmd * R e3.
Vec3 thrust_force(const Mat3& R, double thrust_accel, const PhysicalParams& params);

// Cable tension [N] in the taut phase; negative means the cable would push.
double cable_tension(const CableCoords& cable, const Vec3& thrust_world,
                     const PhysicalParams& params);

struct TautDerivative {
  Vec3 x_l_dot;
  Vec3 v_l_dot;
  Vec3 rho_dot;
  Vec3 rho_ddot;
  Mat3 R_dot;
  Vec3 omega_dot;
};

// Throws InvalidArgument when |rho| deviates from 1 by more than 1e-6.
TautDerivative taut_derivatives(const SystemState& state, const CableCoords& cable,
                                double thrust_accel, const Vec3& moment,
                                const PhysicalParams& params);

struct SlackDerivative {
  Vec3 x_q_dot;
  Vec3 v_q_dot;
  Mat3 R_dot;
  Vec3 omega_dot;
  Vec3 x_l_dot;
  Vec3 v_l_dot;
};

SlackDerivative slack_derivatives(const SystemState& state, double thrust_accel,
                                  const Vec3& moment, const PhysicalParams& params);

// Inner rate loop: M = I K (w_cmd - w) + w x I w.
Vec3 rate_moment(const Vec3& omega_cmd, const Vec3& omega, const PhysicalParams& params);

struct StepEvents {
  bool taut_to_slack = false;
  bool slack_to_taut = false;
  // Slack->taut contact whose post-impulse tension was negative; stays slack.
  bool retaut_rejected = false;
  // slack_to_taut_impulse called without separating radial velocity.
  bool impulse_noop = false;

  bool any_transition() const { return taut_to_slack || slack_to_taut; }
};

struct StepResult {
  SystemState state;
  StepEvents events;
};

// One RK4 step with event location for phase transitions. Throws
// IntegrationFailure on non-finite state, InvalidArgument on dt <= 0.
StepResult hybrid_step(const SystemState& state, const PhysicalCommand& command,
                       const PhysicalParams& params, double dt);

struct ImpulseResult {
  SystemState state;
  bool applied = false;  // false: non-separating input, state returned as-is
};

// Inelastic, momentum-conserving impulse along the cable.
ImpulseResult slack_to_taut_impulse(const SystemState& state, const PhysicalParams& params);

// Slack->taut transition rule: stretched to (at least) l and separating.
bool should_retaut(const SystemState& state, const PhysicalParams& params);

// Translational mechanical energy (both bodies, gravity potential).
double mechanical_energy(const SystemState& state, const PhysicalParams& params);
Vec3 linear_momentum(const SystemState& state, const PhysicalParams& params);
double kinetic_energy(const SystemState& state, const PhysicalParams& params);

// Upright, stationary, payload hanging l below the quadrotor.
SystemState hover_state(const Vec3& x_q, const PhysicalParams& params, double t = 0.0);

// Taut state built from payload kinematics and cable coordinates.
SystemState taut_state(const Vec3& x_l, const Vec3& v_l, const CableCoords& cable,
                       const Mat3& R, const Vec3& omega, const PhysicalParams& params,
                       double t = 0.0);

// |(|x_q - x_l| - l)|.
double cable_drift(const SystemState& state, const PhysicalParams& params);

}  // namespace slung
