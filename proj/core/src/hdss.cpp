#include "slung/hdss.hpp"

#include "slung/so3.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace slung {

Eigen::Matrix<double, 4, 3> FlatChain::payload_block() const {
  Eigen::Matrix<double, 4, 3> b;
  b.row(0) = x_l.transpose();
  b.row(1) = v_l.transpose();
  b.row(2) = a_l.transpose();
  b.row(3) = j_l.transpose();
  return b;
}

Eigen::Matrix3d FlatChain::quad_block() const {
  Eigen::Matrix3d b;
  b.row(0) = x_q.transpose();
  b.row(1) = v_q.transpose();
  b.row(2) = a_q.transpose();
  return b;
}

void FlatChain::set_payload_block(const Eigen::Matrix<double, 4, 3>& b) {
  x_l = b.row(0).transpose();
  v_l = b.row(1).transpose();
  a_l = b.row(2).transpose();
  j_l = b.row(3).transpose();
}

void FlatChain::set_quad_block(const Eigen::Matrix3d& b) {
  x_q = b.row(0).transpose();
  v_q = b.row(1).transpose();
  a_q = b.row(2).transpose();
}

bool FlatChain::finite() const {
  return x_l.allFinite() && v_l.allFinite() && a_l.allFinite() && j_l.allFinite() &&
         x_q.allFinite() && v_q.allFinite() && a_q.allFinite();
}

Vec3 SampleRange::draw(Rng& rng) const {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

void SeedConfig::validate() const {
  if (horizon < 1) throw InvalidArgument("SeedConfig: horizon must be >= 1");
  if (!(dt > 0.0)) throw InvalidArgument("SeedConfig: dt must be positive");
  for (const SampleRange* r : {&snap, &slack_jerk, &goal_velocity, &goal_accel, &goal_jerk}) {
    if (!r->well_ordered()) throw InvalidArgument("SeedConfig: sampling range lo > hi");
  }
  if (payload_cone_half_angle < 0.0 || payload_cone_half_angle > kPi) {
    throw InvalidArgument("SeedConfig: payload cone half angle must lie in [0, pi]");
  }
  if (!(tension_epsilon > 0.0) || !(drift_tolerance > 0.0) || max_resamples < 0) {
    throw InvalidArgument("SeedConfig: thresholds must be positive");
  }
}

SeedConfig SeedConfig::degenerate() {
  SeedConfig cfg;
  cfg.snap = cfg.slack_jerk = cfg.goal_velocity = cfg.goal_accel = cfg.goal_jerk = {0.0, 0.0};
  cfg.payload_cone_half_angle = 0.0;
  return cfg;
}

PayloadMap taut_payload_map(double dt) {
  const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt;
  PayloadMap m;
  m.A << 1.0, -dt, 0.5 * dt2, -dt3 / 6.0,
         0.0, 1.0, -dt, 0.5 * dt2,
         0.0, 0.0, 1.0, -dt,
         0.0, 0.0, 0.0, 1.0;
  m.B << -dt4 / 24.0, dt3 / 6.0, -0.5 * dt2, dt;
  m.C.setZero();
  return m;
}

PayloadMap slack_payload_map(double dt) {
  PayloadMap m;
  m.A << 1.0, -dt, 0.5 * dt * dt, 0.0,
         0.0, 1.0, -dt, 0.0,
         0.0, 0.0, 0.0, 0.0,
         0.0, 0.0, 0.0, 0.0;
  m.B.setZero();
  m.C << 0.0, 0.0, 1.0, 0.0;
  return m;
}

QuadMap taut_quad_map(double dt) {
  QuadMap m;
  m.D << 1.0, -dt, 0.5 * dt * dt,
         0.0, 1.0, -dt,
         0.0, 0.0, 0.0;
  m.E.setZero();
  return m;
}

QuadMap slack_quad_map(double dt) {
  QuadMap m;
  m.D << 1.0, -dt, 0.5 * dt * dt,
         0.0, 1.0, -dt,
         0.0, 0.0, 1.0;
  m.E << -dt * dt * dt / 6.0, 0.5 * dt * dt, -dt;
  return m;
}

UnitDerivatives unit_vector_derivatives(const Vec3& u, const Vec3& u_dot, const Vec3& u_ddot) {
  const double norm = u.norm();
  UnitDerivatives d;
  d.n = u / norm;
  const Mat3 P = Mat3::Identity() - d.n * d.n.transpose();
  d.n_dot = P * u_dot / norm;
  d.n_ddot = P * u_ddot / norm - 2.0 * d.n.dot(u_dot) / norm * d.n_dot -
             d.n_dot.squaredNorm() * d.n;
  return d;
}

FlatChain sample_goal_chain(const Waypoint& waypoint, const SeedConfig& cfg,
                            const PhysicalParams& params, Rng& rng) {
  const Mat3 target = waypoint.rotation();
  const double l = params.cable_length;
  const Vec3 g = params.gravity_vector();

  // Uniform on the spherical cap around -z_T.
  const double cos_lo = std::cos(cfg.payload_cone_half_angle);
  const double cos_theta = rng.uniform(cos_lo, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  const Vec3 offset_dir = -cos_theta * target.col(2) +
                          sin_theta * (std::cos(phi) * target.col(0) + std::sin(phi) * target.col(1));

  FlatChain c;
  c.phase = CablePhase::kTaut;
  c.step_index = cfg.horizon;
  c.x_q = waypoint.position;
  c.x_l = waypoint.position + l * offset_dir;
  c.v_l = cfg.goal_velocity.draw(rng);
  const Vec3 a_sampled = cfg.goal_accel.draw(rng);
  c.j_l = cfg.goal_jerk.draw(rng);

  // Tension direction must point from the payload to the quadrotor.
  const double tension_accel = (a_sampled - g).norm();
  c.a_l = g - tension_accel * offset_dir;

  const UnitDerivatives n = unit_vector_derivatives(c.a_l - g, c.j_l, Vec3::Zero());
  c.v_q = c.v_l + l * n.n_dot;
  c.a_q = c.a_l + l * n.n_ddot;
  return c;
}

std::optional<FlatChain> backstep_taut(const FlatChain& chain, const Vec3& snap,
                                       const SeedConfig& cfg, const PhysicalParams& params) {
  const PayloadMap pm = taut_payload_map(cfg.dt);
  const Eigen::Matrix<double, 4, 3> xi_l = pm.A * chain.payload_block() + pm.B * snap.transpose();
  const Vec3 a_l_prev = xi_l.row(2).transpose();
  const double tension_accel = (a_l_prev - params.gravity_vector()).norm();
  if (tension_accel < cfg.tension_epsilon) return std::nullopt;

  const QuadMap qm = taut_quad_map(cfg.dt);
  Eigen::Matrix3d xi_q = qm.D * chain.quad_block();
  xi_q.row(2) += (a_l_prev + params.cable_length / tension_accel * snap).transpose();

  FlatChain out = chain;
  out.set_payload_block(xi_l);
  out.set_quad_block(xi_q);
  out.step_index = chain.step_index - 1;
  return out;
}

FlatChain backstep_slack(const FlatChain& chain, const Vec3& quad_jerk, const SeedConfig& cfg,
                         const PhysicalParams& params) {
  const PayloadMap pm = slack_payload_map(cfg.dt);
  const QuadMap qm = slack_quad_map(cfg.dt);
  const Eigen::Matrix<double, 4, 3> xi_l =
      pm.A * chain.payload_block() + pm.C * params.gravity_vector().transpose();
  const Eigen::Matrix3d xi_q = qm.D * chain.quad_block() + qm.E * quad_jerk.transpose();
  FlatChain out = chain;
  out.set_payload_block(xi_l);
  out.set_quad_block(xi_q);
  out.step_index = chain.step_index - 1;
  return out;
}

PhaseSwitch detect_backward_phase_switch(const FlatChain& chain, const PhysicalParams& params,
                                         double tension_epsilon) {
  if (chain.phase == CablePhase::kTaut) {
    return (chain.a_l - params.gravity_vector()).norm() < tension_epsilon ? PhaseSwitch::kToSlack
                                                                          : PhaseSwitch::kStay;
  }
  return (chain.x_q - chain.x_l).norm() >= params.cable_length ? PhaseSwitch::kToTaut
                                                               : PhaseSwitch::kStay;
}

Mat3 derive_attitude(const Vec3& a_q, double yaw, const PhysicalParams& params) {
  const Vec3 thrust_dir = a_q - params.gravity_vector();
  if (thrust_dir.norm() <= 1e-6) {
    throw SingularAttitude("derive_attitude: free-fall acceleration leaves the attitude undefined");
  }
  const Vec3 z = thrust_dir.normalized();
  const Vec3 heading{std::cos(yaw), std::sin(yaw), 0.0};
  Vec3 y = z.cross(heading);
  Mat3 R;
  if (y.norm() > 1e-9) {
    y.normalize();
    R.col(0) = y.cross(z);
    R.col(1) = y;
  } else {
    // Body z along the heading: build x from the lateral direction instead.
    const Vec3 lateral{-std::sin(yaw), std::cos(yaw), 0.0};
    const Vec3 x = lateral.cross(z).normalized();
    R.col(0) = x;
    R.col(1) = z.cross(x);
  }
  R.col(2) = z;
  return R;
}

Vec3 derive_body_rates(const Mat3& R_prev, const Mat3& R_next, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("derive_body_rates: dt must be positive");
  const Mat3 rel = R_prev.transpose() * R_next;
  if (so3::geodesic_angle(rel) >= kPi - 1e-6) {
    throw AmbiguousRotation("derive_body_rates: relative rotation too close to pi");
  }
  return so3::log(rel) / dt;
}

SeedTrace seed_attempt(const Waypoint& waypoint, const SeedConfig& cfg,
                       const PhysicalParams& params, Rng& rng) {
  const int K = cfg.horizon;
  const double l = params.cable_length;
  const Vec3 g = params.gravity_vector();

  SeedTrace trace;
  std::vector<FlatChain> backward;
  backward.reserve(static_cast<std::size_t>(K) + 1);
  FlatChain chain = sample_goal_chain(waypoint, cfg, params, rng);
  backward.push_back(chain);

  for (int k = 0; k < K; ++k) {
    bool stepped = false;
    if (chain.phase == CablePhase::kTaut) {
      const Vec3 snap = cfg.snap.draw(rng);
      if (auto prev = backstep_taut(chain, snap, cfg, params)) {
        chain = *prev;
        stepped = true;
      } else {
        chain.phase = CablePhase::kSlack;
        ++trace.phase_switches;
      }
    }
    if (!stepped) {
      chain = backstep_slack(chain, cfg.slack_jerk.draw(rng), cfg, params);
      if (detect_backward_phase_switch(chain, params, cfg.tension_epsilon) ==
          PhaseSwitch::kToTaut) {
        // Re-enter with a small tension along the current cable direction.
        chain.phase = CablePhase::kTaut;
        chain.a_l = g + 2.0 * cfg.tension_epsilon * (chain.x_q - chain.x_l).normalized();
        chain.j_l.setZero();
        ++trace.phase_switches;
      }
    }
    backward.push_back(chain);
  }

  trace.chain.assign(backward.rbegin(), backward.rend());

  // Attitudes, computed from the goal backwards so a singular step can reuse
  // the attitude of the step after it.
  trace.attitudes.assign(trace.chain.size(), Mat3::Identity());
  Mat3 last = waypoint.rotation();
  for (int i = K; i >= 0; --i) {
    try {
      last = derive_attitude(trace.chain[static_cast<std::size_t>(i)].a_q, waypoint.yaw, params);
    } catch (const SingularAttitude&) {
    }
    trace.attitudes[static_cast<std::size_t>(i)] = last;
  }

  for (const FlatChain& c : trace.chain) {
    if (c.phase == CablePhase::kTaut) {
      trace.max_drift = std::max(trace.max_drift, std::abs((c.x_q - c.x_l).norm() - l));
    }
  }

  const FlatChain& first = trace.chain.front();
  if (!first.finite()) {
    trace.reject_reason = "non-finite chain";
    return trace;
  }

  Vec3 omega = Vec3::Zero();
  try {
    omega = derive_body_rates(trace.attitudes[0], trace.attitudes[1], cfg.dt);
  } catch (const AmbiguousRotation&) {
    trace.reject_reason = "ambiguous body rate";
    return trace;
  }

  if (first.phase == CablePhase::kTaut) {
    SystemState probe;
    probe.x_q = first.x_q;
    probe.v_q = first.v_q;
    probe.x_l = first.x_l;
    probe.v_l = first.v_l;
    trace.state = taut_state(first.x_l, first.v_l, cable_coords(probe), trace.attitudes[0], omega,
                             params);
  } else {
    SystemState& s = trace.state;
    s.x_q = first.x_q;
    s.v_q = first.v_q;
    s.x_l = first.x_l;
    s.v_l = first.v_l;
    s.R = trace.attitudes[0];
    s.omega = omega;
    s.phase = CablePhase::kSlack;
  }
  trace.state.t = 0.0;

  if (trace.max_drift > cfg.drift_tolerance * l) {
    trace.reject_reason = "cable drift";
  } else if ((omega.cwiseAbs().array() > cfg.rate_limit_factor * params.max_body_rate.array()).any()) {
    trace.reject_reason = "body rate";
  } else if (!cfg.workspace.contains(trace.state.x_q) || !cfg.workspace.contains(trace.state.x_l)) {
    trace.reject_reason = "workspace";
  } else if (!trace.state.finite()) {
    trace.reject_reason = "non-finite state";
  } else {
    trace.valid = true;
  }
  return trace;
}

SeededEpisodeState generate_seed(const Waypoint& waypoint, const SeedConfig& cfg,
                                 const PhysicalParams& params, Rng& rng) {
  for (int attempt = 0; attempt <= cfg.max_resamples; ++attempt) {
    SeedTrace trace = seed_attempt(waypoint, cfg, params, rng);
    if (trace.valid) {
      return {trace.state, trace.max_drift, trace.phase_switches, attempt};
    }
  }
  throw SeedingFailure("generate_seed: no valid seed after " +
                       std::to_string(cfg.max_resamples + 1) + " attempts");
}

ForwardCheck forward_verify(const SeedTrace& trace, const SeedConfig& cfg,
                            const PhysicalParams& params) {
  ForwardCheck out;
  if (trace.chain.size() < 2) return out;
  const Vec3 g = params.gravity_vector();
  SystemState s = trace.state;
  for (std::size_t k = 0; k + 1 < trace.chain.size(); ++k) {
    const FlatChain& c = trace.chain[k];
    Vec3 force = params.quad_mass * (c.a_q - g);
    if (c.phase == CablePhase::kTaut) force += params.payload_mass * (c.a_l - g);
    PhysicalCommand cmd;
    cmd.thrust_accel = std::max(0.0, force.dot(s.R.col(2)) / params.quad_mass);
    try {
      cmd.body_rate = derive_body_rates(trace.attitudes[k], trace.attitudes[k + 1], cfg.dt);
    } catch (const AmbiguousRotation&) {
      cmd.body_rate = s.omega;
    }
    s = hybrid_step(s, cmd, params, cfg.dt).state;
    const FlatChain& next = trace.chain[k + 1];
    out.max_quad_divergence = std::max(out.max_quad_divergence, (s.x_q - next.x_q).norm());
    out.max_payload_divergence = std::max(out.max_payload_divergence, (s.x_l - next.x_l).norm());
    out.final_quad_divergence = (s.x_q - next.x_q).norm();
  }
  return out;
}

}  // namespace slung
