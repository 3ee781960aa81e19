#pragma once

// Scenario builders shared by the unit and acceptance tests.

#include "slung/config.hpp"
#include "slung/env.hpp"
#include "slung/dynamics.hpp"
#include "slung/rng.hpp"
#include "slung/tracks.hpp"

#include "oracles/traversal_predicate.hpp"

#include <cmath>
#include <vector>

namespace slung::test {

// Both bodies in zero-thrust free fall with the payload circling the
// quadrotor at `rate` rad/s; the cable stays taut from centripetal load.
inline SystemState spinning_free_fall(const PhysicalParams& p, double rate) {
  SystemState s = hover_state({0.0, 0.0, 4.0}, p);
  const Vec3 w(rate * p.cable_length, 0.0, 0.0);
  s.v_q = -(p.payload_mass / p.total_mass()) * w;
  s.v_l = (p.quad_mass / p.total_mass()) * w;
  return s;
}

// Period of small swings under constant upright hover thrust, from the
// upward zero crossings of the cable's x component.
inline double measured_swing_period(const PhysicalParams& p, double angle, double dt) {
  SystemState s = hover_state({0.0, 0.0, 4.0}, p);
  s.x_l = s.x_q + p.cable_length * Vec3(std::sin(angle), 0.0, -std::cos(angle));
  PhysicalCommand cmd;
  cmd.thrust_accel = p.hover_thrust_accel();
  std::vector<double> crossings;
  double prev = (s.x_l - s.x_q).x();
  const int n = static_cast<int>(std::lround(6.0 / dt));
  for (int i = 0; i < n; ++i) {
    const double t0 = s.t;
    s = hybrid_step(s, cmd, p, dt).state;
    const double cur = (s.x_l - s.x_q).x();
    if (prev < 0.0 && cur >= 0.0) crossings.push_back(t0 + dt * (-prev) / (cur - prev));
    prev = cur;
  }
  if (crossings.size() < 2) return 0.0;
  return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

// Slack state at (or just beyond) full cable length with separating radial
// velocity.
inline SystemState random_pre_impact(const PhysicalParams& p, Rng& rng) {
  SystemState s;
  s.phase = CablePhase::kSlack;
  const Vec3 rho = rng.unit_vector();
  s.x_q = rng.uniform3(Vec3(-5, -5, 1), Vec3(5, 5, 7));
  s.x_l = s.x_q + p.cable_length * (1.0 + rng.uniform(0.0, 1e-3)) * rho;
  s.v_q = rng.uniform3(Vec3::Constant(-5.0), Vec3::Constant(5.0));
  Vec3 tangential = rng.uniform3(Vec3::Constant(-3.0), Vec3::Constant(3.0));
  tangential -= tangential.dot(rho) * rho;
  s.v_l = s.v_q + rng.uniform(0.01, 5.0) * rho + tangential;
  s.R = Mat3::Identity();
  return s;
}

// One upright waypoint 2 m ahead of the hover start, facing +x.
inline Track straight_line_track() {
  Track t;
  t.name = "line";
  t.start = Vec3(0.0, 0.0, 3.0);
  t.waypoints.push_back(make_waypoint({2.0, 0.0, 3.0}, WaypointKind::kUpright, 0.0));
  return t;
}

// Synthetic (prev, next) pairs around a waypoint. Lateral distance and
// attitude error cluster around `proximity` and `tolerance`, with a share of
// cases placed exactly on the distance and plane boundaries.
inline std::vector<oracle::TraversalCase> traversal_cases(int n, std::uint64_t seed,
                                                          double proximity, double tolerance) {
  Rng rng(seed);
  std::vector<oracle::TraversalCase> cases;
  cases.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    oracle::TraversalCase c;
    const int kind = i % 8;
    c.gate = rng.uniform3(Vec3(-5, -5, 1), Vec3(5, 5, 7));
    if (kind == 0) {
      // Exactly L from the gate, upright target facing +x.
      c.target = Quat::Identity();
      c.gate = Vec3(1.0, 2.0, 3.0);
      c.next_x_q = c.gate + Vec3(0.0, proximity, 0.0);
      c.prev_x_q = c.gate + Vec3(-0.01, proximity, 0.0);
      c.body = Quat::Identity();
      cases.push_back(c);
      continue;
    }
    if (kind == 1) {
      // Ends exactly on the gate plane. Axis-aligned targets keep the
      // projection exact in floating point.
      c.target = rng.bernoulli(0.5) ? Quat::Identity() : Quat(0.0, 1.0, 0.0, 0.0);
      c.gate = Vec3(-2.0, 1.5, 4.0);
      c.prev_x_q = c.gate + Vec3(-0.25, 0.5, -0.25);
      c.next_x_q = c.gate + Vec3(0.0, 0.5, -0.25);
      c.body = c.target;
      cases.push_back(c);
      continue;
    }
    c.target = waypoint_attitude(rng.bernoulli(0.5) ? WaypointKind::kInverted : WaypointKind::kUpright,
                                 rng.uniform(0.0, 2.0 * kPi));
    const Mat3 R = c.target.toRotationMatrix();
    double along_prev = rng.uniform(-0.1, 0.05);
    double along_next = rng.uniform(-0.05, 0.1);
    double radius = rng.uniform(0.0, 1.2);
    if (kind == 2) radius = proximity + rng.uniform(-1e-6, 1e-6);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const Vec3 lateral = radius * (std::cos(phi) * R.col(1) + std::sin(phi) * R.col(2));
    c.prev_x_q = c.gate + along_prev * R.col(0) + lateral;
    c.next_x_q = c.gate + along_next * R.col(0) + lateral;
    double angle = rng.uniform(0.0, 2.0 * tolerance);
    // Attitude error is only resolvable to rounding, so boundary cases sit a
    // hair to either side rather than on it.
    if (kind == 3) angle = tolerance + (rng.bernoulli(0.5) ? 1e-9 : -1e-9);
    if (kind == 4) angle = tolerance + rng.uniform(-1e-6, 1e-6);
    c.body = c.target * Quat(Eigen::AngleAxisd(angle, rng.unit_vector()));
    cases.push_back(c);
  }
  return cases;
}

// Small, fast configuration for training smoke tests.
inline RunConfig tiny_run_config(std::uint64_t seed = 7) {
  RunConfig c;
  c.ppo.num_envs = 4;
  c.ppo.horizon = 16;
  c.ppo.epochs = 2;
  c.ppo.minibatches = 2;
  c.policy.hidden_size = 8;
  c.train.seed = seed;
  c.train.iterations = 2;
  return c;
}

}  // namespace slung::test
