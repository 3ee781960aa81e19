#include "slung/env.hpp"

#include "slung/so3.hpp"

#include <algorithm>
#include <cmath>

namespace slung {
namespace {

void put_vec(Observation& o, int at, const Vec3& v) {
  for (int i = 0; i < 3; ++i) o[static_cast<std::size_t>(at + i)] = v[i];
}

void put_mat(Observation& o, int at, const Mat3& m) {
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) o[static_cast<std::size_t>(at + 3 * r + c)] = m(r, c);
  }
}

}  // namespace

void EnvConfig::validate() const {
  for (double v : {lambda1, lambda2, lambda3, sigma_p, sigma_theta, completion_bonus, proximity,
                   attitude_tolerance, r_exceed, r_bound, dt}) {
    if (!(v > 0.0)) throw InvalidArgument("EnvConfig: thresholds and constants must be positive");
  }
  if (!(k_q.array() > 0.0).all() || !(k_v.array() > 0.0).all() || !(k_l.array() > 0.0).all()) {
    throw InvalidArgument("EnvConfig: scaling constants must be positive");
  }
  if (hdss_fraction < 0.0 || hdss_fraction > 1.0) {
    throw InvalidArgument("EnvConfig: hdss_fraction must lie in [0, 1]");
  }
  if (dr_fraction < 0.0 || dr_fraction >= 1.0) {
    throw InvalidArgument("EnvConfig: dr_fraction must lie in [0, 1)");
  }
  if (max_episode_steps < 1) throw InvalidArgument("EnvConfig: max_episode_steps must be >= 1");
  if (!(workspace.hi.array() - workspace.lo.array() > 2.0 * spawn_margin).all()) {
    throw InvalidArgument("EnvConfig: workspace too small for the spawn margin");
  }
  physics.validate();
  seed.validate();
}

Vec3 payload_in_body(const SystemState& state) {
  return state.R.transpose() * (state.x_l - state.x_q);
}

Observation build_observation(const SystemState& state, const Waypoint& next,
                              const Waypoint& lookahead, const Vec4& prev_action,
                              const EnvConfig& cfg) {
  using L = ObservationLayout;
  Observation o{};
  const Mat3 R_tw = next.rotation();
  put_vec(o, L::kDx1, (next.position - state.x_q).cwiseQuotient(cfg.k_q));
  put_vec(o, L::kDx2, (lookahead.position - state.x_q).cwiseQuotient(cfg.k_q));
  put_vec(o, L::kVq, state.v_q.cwiseQuotient(cfg.k_v));
  put_mat(o, L::kRbt, R_tw.transpose() * state.R);
  put_vec(o, L::kPayloadBody, payload_in_body(state).cwiseQuotient(cfg.k_l));
  put_vec(o, L::kVl, state.v_l.cwiseQuotient(cfg.k_v));
  put_mat(o, L::kRtw, R_tw);
  for (int i = 0; i < kActionSize; ++i) o[static_cast<std::size_t>(L::kPrevAction + i)] = prev_action[i];
  return o;
}

ActionCommand map_action(const Vec4& a_norm, const PhysicalParams& params) {
  ActionCommand cmd;
  cmd.normalized = a_norm.cwiseMax(-1.0).cwiseMin(1.0);
  cmd.physical.thrust_accel = (cmd.normalized[0] + 1.0) / 2.0 * params.max_thrust_accel;
  cmd.physical.body_rate = cmd.normalized.tail<3>().cwiseProduct(params.max_body_rate);
  return cmd;
}

double attitude_error(const Mat3& R_body, const Mat3& R_target) {
  return so3::geodesic_angle(R_target.transpose() * R_body);
}

TraversalInfo check_traversal(const SystemState& prev, const SystemState& next,
                              const Waypoint& waypoint, const EnvConfig& cfg) {
  const Mat3 R_tw = waypoint.rotation();
  const Vec3 x_t = R_tw.col(0);
  const double before = (prev.x_q - waypoint.position).dot(x_t);
  const double after = (next.x_q - waypoint.position).dot(x_t);
  TraversalInfo info;
  info.crossed_plane = before < 0.0 && after >= 0.0;
  info.pos_err = (waypoint.position - next.x_q).norm();
  info.att_err = attitude_error(next.R, R_tw);
  info.traversed = info.crossed_plane && info.pos_err < cfg.proximity &&
                   info.att_err < cfg.attitude_tolerance;
  return info;
}

RewardBreakdown compute_reward(const SystemState& /*prev*/, const SystemState& next,
                               const Vec4& a_prev, const Vec4& a_now,
                               const TraversalInfo& traversal, const EnvConfig& cfg) {
  RewardBreakdown r;
  r.traversed = traversal.traversed;
  r.pos_err = traversal.pos_err;
  r.att_err = traversal.att_err;
  if (traversal.traversed) {
    r.r_target = cfg.lambda1 * std::exp(-cfg.sigma_p * traversal.pos_err) +
                 cfg.lambda2 * std::exp(-cfg.sigma_theta * traversal.att_err) +
                 cfg.completion_bonus;
  }
  if (payload_in_body(next).z() > 0.0) r.r_safe = -cfg.r_exceed;
  if (!cfg.workspace.contains(next.x_q) || !cfg.workspace.contains(next.x_l)) {
    r.r_crash = -cfg.r_bound;
  }
  r.r_smooth = -cfg.lambda3 * (a_prev - a_now).norm();
  return r;
}

ResetResult reset_state(ResetMode mode, const Waypoint& waypoint, const EnvConfig& cfg,
                        const PhysicalParams& params, Rng& rng) {
  if (mode == ResetMode::kAuto) {
    mode = rng.bernoulli(cfg.hdss_fraction) ? ResetMode::kHdss : ResetMode::kHover;
  }
  ResetResult out;
  if (mode == ResetMode::kHdss) {
    SeedConfig seed_cfg = cfg.seed;
    seed_cfg.workspace = cfg.workspace;
    try {
      SeededEpisodeState seed = generate_seed(waypoint, seed_cfg, params, rng);
      out.state = seed.state;
      out.used = ResetMode::kHdss;
      out.seed = seed;
      return out;
    } catch (const SeedingFailure&) {
      // Falls through to a hover reset.
    }
  }
  const Workspace spawn = cfg.workspace.shrunk(cfg.spawn_margin);
  out.state = hover_state(rng.uniform3(spawn.lo, spawn.hi), params);
  out.used = ResetMode::kHover;
  return out;
}

PhysicalParams randomize_params(const PhysicalParams& params, Rng& rng, double dr_fraction) {
  PhysicalParams p = params;
  p.payload_mass *= rng.uniform(1.0 - dr_fraction, 1.0 + dr_fraction);
  p.cable_length *= rng.uniform(1.0 - dr_fraction, 1.0 + dr_fraction);
  return p;
}

WaypointQueue WaypointQueue::fixed(Track track) {
  if (track.waypoints.empty()) throw InvalidArgument("WaypointQueue: empty track");
  WaypointQueue q;
  q.waypoints_ = std::move(track.waypoints);
  return q;
}

WaypointQueue WaypointQueue::resampling(const Waypoint& first, const TrackGenConfig& cfg, Rng& rng) {
  WaypointQueue q;
  q.resample_ = true;
  q.gen_ = cfg;
  q.waypoints_ = {first, resample_waypoint(first, rng, cfg)};
  return q;
}

const Waypoint& WaypointQueue::current() const {
  return waypoints_[std::min(cursor_, waypoints_.size() - 1)];
}

const Waypoint& WaypointQueue::lookahead() const {
  return waypoints_[std::min(cursor_ + 1, waypoints_.size() - 1)];
}

void WaypointQueue::advance(Rng& rng) {
  ++traversed_;
  if (resample_) {
    waypoints_[0] = waypoints_[1];
    waypoints_[1] = resample_waypoint(waypoints_[1], rng, gen_);
  } else {
    ++cursor_;
  }
}

bool WaypointQueue::finished() const { return !resample_ && cursor_ >= waypoints_.size(); }

Environment::Environment(EnvConfig cfg, Rng rng) : cfg_(std::move(cfg)), rng_(std::move(rng)) {
  cfg_.seed.workspace = cfg_.workspace;
  cfg_.track_gen.workspace = cfg_.workspace;
  cfg_.validate();
  params_ = cfg_.physics;
  state_ = hover_state(cfg_.workspace.center(), params_);
  queue_ = WaypointQueue::fixed(Track{"idle", {make_waypoint(cfg_.workspace.center(),
                                                             WaypointKind::kUpright, 0.0,
                                                             cfg_.workspace)}, {}, {}});
}

Observation Environment::observe() const {
  return build_observation(state_, queue_.current(), queue_.lookahead(), prev_action_, cfg_);
}

Observation Environment::reset() {
  params_ = cfg_.domain_randomization ? randomize_params(cfg_.physics, rng_, cfg_.dr_fraction)
                                      : cfg_.physics;
  ResetMode mode = cfg_.reset_mode;
  if (mode == ResetMode::kAuto) {
    mode = rng_.bernoulli(cfg_.hdss_fraction) ? ResetMode::kHdss : ResetMode::kHover;
  }
  const Workspace spawn = cfg_.workspace.shrunk(cfg_.spawn_margin);
  Waypoint first;
  if (mode == ResetMode::kHdss) {
    const Vec3 anchor = rng_.uniform3(spawn.lo, spawn.hi);
    first = resample_waypoint(make_waypoint(anchor, WaypointKind::kUpright, 0.0, cfg_.workspace),
                              rng_, cfg_.track_gen);
    const ResetResult r = reset_state(ResetMode::kHdss, first, cfg_, params_, rng_);
    state_ = r.state;
    last_reset_ = r.used;
  } else {
    const ResetResult r = reset_state(ResetMode::kHover, Waypoint{}, cfg_, params_, rng_);
    state_ = r.state;
    last_reset_ = ResetMode::kHover;
    first = resample_waypoint(make_waypoint(state_.x_q, WaypointKind::kUpright, 0.0, cfg_.workspace),
                              rng_, cfg_.track_gen);
  }
  queue_ = WaypointQueue::resampling(first, cfg_.track_gen, rng_);
  prev_action_.setZero();
  episode_ = {};
  return observe();
}

Observation Environment::reset_on_track(const Track& track, const PhysicalParams& params) {
  params_ = params;
  state_ = hover_state(track.start.value_or(cfg_.workspace.center()), params_);
  queue_ = WaypointQueue::fixed(track);
  prev_action_.setZero();
  episode_ = {};
  last_reset_ = ResetMode::kHover;
  return observe();
}

Observation Environment::reset_to(const SystemState& state, const Waypoint& first) {
  params_ = cfg_.physics;
  state_ = state;
  queue_ = WaypointQueue::resampling(first, cfg_.track_gen, rng_);
  prev_action_.setZero();
  episode_ = {};
  return observe();
}

StepOutcome Environment::step(const Vec4& a_norm) {
  const ActionCommand cmd = map_action(a_norm, params_);
  StepOutcome out;
  const SystemState prev = state_;
  SystemState next;
  try {
    StepResult r = hybrid_step(prev, cmd.physical, params_, cfg_.dt);
    next = r.state;
    out.info.events = r.events;
  } catch (const IntegrationFailure&) {
    out.info.integration_failure = true;
    out.reward.r_crash = -cfg_.r_bound;
    out.reward.r_smooth = -cfg_.lambda3 * (prev_action_ - cmd.normalized).norm();
    out.done = true;
    prev_action_ = cmd.normalized;
    episode_.total_reward += out.reward.total();
    ++episode_.length;
    out.observation = observe();
    return out;
  }

  const TraversalInfo trav = check_traversal(prev, next, queue_.current(), cfg_);
  out.reward = compute_reward(prev, next, prev_action_, cmd.normalized, trav, cfg_);
  state_ = next;
  prev_action_ = cmd.normalized;
  ++episode_.length;
  episode_.total_reward += out.reward.total();

  if (trav.traversed) {
    ++episode_.traversals;
    queue_.advance(rng_);
    if (queue_.finished()) {
      out.info.track_complete = true;
      out.done = true;
    }
  }
  if (out.reward.r_crash != 0.0) {
    out.info.crashed = true;
    out.done = true;
  }
  if (!out.done && episode_.length >= cfg_.max_episode_steps) {
    out.info.truncated = true;
    out.done = true;
  }
  out.observation = observe();
  return out;
}

}  // namespace slung
