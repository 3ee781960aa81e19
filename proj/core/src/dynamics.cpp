#include "slung/dynamics.hpp"

#include "slung/so3.hpp"

#include <cmath>
#include <string>

namespace slung {
namespace {

constexpr double kRetautTensionTolerance = 1e-9;  // N
constexpr double kSeparationTolerance = 1e-12;    // m/s
constexpr int kMaxTransitionsPerStep = 4;
constexpr int kBisectionIterations = 60;

// Integration coordinates for the taut phase.
struct TautCoords {
  Vec3 x_l, v_l, rho, rho_dot;
  Mat3 R;
  Vec3 omega;

  TautCoords plus(const TautCoords& d, double h) const {
    return {x_l + h * d.x_l, v_l + h * d.v_l, rho + h * d.rho, rho_dot + h * d.rho_dot,
            R + h * d.R,     omega + h * d.omega};
  }
};

struct SlackCoords {
  Vec3 x_q, v_q;
  Mat3 R;
  Vec3 omega;
  Vec3 x_l, v_l;

  SlackCoords plus(const SlackCoords& d, double h) const {
    return {x_q + h * d.x_q, v_q + h * d.v_q, R + h * d.R,
            omega + h * d.omega, x_l + h * d.x_l, v_l + h * d.v_l};
  }
};

template <typename Coords>
Coords weighted_sum(const Coords& k1, const Coords& k2, const Coords& k3, const Coords& k4) {
  // (k1 + 2 k2 + 2 k3 + k4) / 6 expressed through plus() on a zero base.
  Coords acc = k1;
  acc = acc.plus(k2, 2.0);
  acc = acc.plus(k3, 2.0);
  acc = acc.plus(k4, 1.0);
  return acc;
}

template <typename Coords, typename Deriv>
Coords rk4(const Coords& y, double h, const Deriv& f) {
  const Coords k1 = f(y);
  const Coords k2 = f(y.plus(k1, h / 2));
  const Coords k3 = f(y.plus(k2, h / 2));
  const Coords k4 = f(y.plus(k3, h));
  return y.plus(weighted_sum(k1, k2, k3, k4), h / 6);
}

Vec3 angular_accel(const Vec3& omega, const Vec3& moment, const PhysicalParams& p) {
  return p.inertia.ldlt().solve(moment - omega.cross(p.inertia * omega));
}

TautCoords taut_rates(const TautCoords& y, const PhysicalCommand& cmd, const PhysicalParams& p) {
  const Vec3 force = thrust_force(y.R, cmd.thrust_accel, p);
  const double l = p.cable_length;
  const double rho_dot_sq = y.rho_dot.squaredNorm();
  const double axial = y.rho.dot(force) - p.quad_mass * l * rho_dot_sq;
  const Vec3 moment = rate_moment(cmd.body_rate, y.omega, p);
  TautCoords d;
  d.x_l = y.v_l;
  d.v_l = p.gravity_vector() + axial / p.total_mass() * y.rho;
  d.rho = y.rho_dot;
  d.rho_dot = -rho_dot_sq * y.rho + y.rho.cross(y.rho.cross(force)) / (p.quad_mass * l);
  d.R = y.R * so3::hat(y.omega);
  d.omega = angular_accel(y.omega, moment, p);
  return d;
}

SlackCoords slack_rates(const SlackCoords& y, const PhysicalCommand& cmd, const PhysicalParams& p) {
  const Vec3 moment = rate_moment(cmd.body_rate, y.omega, p);
  SlackCoords d;
  d.x_q = y.v_q;
  d.v_q = p.gravity_vector() + cmd.thrust_accel * y.R.col(2);
  d.R = y.R * so3::hat(y.omega);
  d.omega = angular_accel(y.omega, moment, p);
  d.x_l = y.v_l;
  d.v_l = p.gravity_vector();
  return d;
}

TautCoords to_taut(const SystemState& s) {
  const CableCoords c = cable_coords(s);
  return {s.x_l, s.v_l, c.rho, c.rho_dot, s.R, s.omega};
}

SystemState from_taut(const TautCoords& y, const PhysicalParams& p, double t) {
  return taut_state(y.x_l, y.v_l, {y.rho, y.rho_dot}, y.R, y.omega, p, t);
}

SystemState integrate_taut(const SystemState& s, const PhysicalCommand& cmd,
                           const PhysicalParams& p, double h) {
  TautCoords y = rk4(to_taut(s), h, [&](const TautCoords& c) { return taut_rates(c, cmd, p); });
  y.rho.normalize();
  y.rho_dot -= y.rho.dot(y.rho_dot) * y.rho;
  y.R = so3::orthonormalize(y.R);
  return from_taut(y, p, s.t + h);
}

SystemState integrate_slack(const SystemState& s, const PhysicalCommand& cmd,
                            const PhysicalParams& p, double h) {
  const SlackCoords y0{s.x_q, s.v_q, s.R, s.omega, s.x_l, s.v_l};
  const SlackCoords y = rk4(y0, h, [&](const SlackCoords& c) { return slack_rates(c, cmd, p); });
  SystemState out;
  out.x_q = y.x_q;
  out.v_q = y.v_q;
  out.R = so3::orthonormalize(y.R);
  out.omega = y.omega;
  out.x_l = y.x_l;
  out.v_l = y.v_l;
  out.phase = CablePhase::kSlack;
  out.t = s.t + h;
  return out;
}

double tension_of(const SystemState& s, const PhysicalCommand& cmd, const PhysicalParams& p) {
  return cable_tension(cable_coords(s), thrust_force(s.R, cmd.thrust_accel, p), p);
}

double separation(const SystemState& s) { return (s.x_l - s.x_q).norm(); }

bool separating(const SystemState& s, double tolerance) {
  const Vec3 rho = (s.x_l - s.x_q).normalized();
  return (s.v_l - s.v_q).dot(rho) > tolerance;
}

void check_finite(const SystemState& s) {
  if (!s.finite()) {
    throw IntegrationFailure("hybrid_step: non-finite state at t=" + std::to_string(s.t));
  }
}

}  // namespace

void PhysicalParams::validate() const {
  if (!(quad_mass > 0.0) || !(payload_mass > 0.0) || !(cable_length > 0.0) || !(gravity > 0.0)) {
    throw InvalidArgument("PhysicalParams: masses, cable length and gravity must be positive");
  }
  if (!(max_thrust_accel > 0.0) || !(max_body_rate.array() > 0.0).all()) {
    throw InvalidArgument("PhysicalParams: thrust and rate limits must be positive");
  }
  if (!inertia.isApprox(inertia.transpose(), 1e-12)) {
    throw InvalidArgument("PhysicalParams: inertia must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia);
  if (!(eig.eigenvalues().array() > 0.0).all()) {
    throw InvalidArgument("PhysicalParams: inertia must be positive definite");
  }
}

bool SystemState::finite() const {
  return x_q.allFinite() && v_q.allFinite() && R.allFinite() && omega.allFinite() &&
         x_l.allFinite() && v_l.allFinite() && std::isfinite(t);
}

CableCoords cable_coords(const SystemState& state) {
  const Vec3 r = state.x_l - state.x_q;
  const double d = r.norm();
  CableCoords c;
  c.rho = r / d;
  const Vec3 v_rel = state.v_l - state.v_q;
  c.rho_dot = (v_rel - c.rho.dot(v_rel) * c.rho) / d;
  return c;
}

Vec3 thrust_force(const Mat3& R, double thrust_accel, const PhysicalParams& params) {
  return params.quad_mass * thrust_accel * R.col(2);
}

double cable_tension(const CableCoords& cable, const Vec3& thrust_world,
                     const PhysicalParams& params) {
  const double axial = cable.rho.dot(thrust_world) -
                       params.quad_mass * params.cable_length * cable.rho_dot.squaredNorm();
  return -params.payload_mass * axial / params.total_mass();
}

TautDerivative taut_derivatives(const SystemState& state, const CableCoords& cable,
                                double thrust_accel, const Vec3& moment,
                                const PhysicalParams& params) {
  if (std::abs(cable.rho.norm() - 1.0) > 1e-6) {
    throw InvalidArgument("taut_derivatives: cable direction is not a unit vector");
  }
  const Vec3 force = thrust_force(state.R, thrust_accel, params);
  const double l = params.cable_length;
  const double rho_dot_sq = cable.rho_dot.squaredNorm();
  const double axial = cable.rho.dot(force) - params.quad_mass * l * rho_dot_sq;
  TautDerivative d;
  d.x_l_dot = state.v_l;
  d.v_l_dot = params.gravity_vector() + axial / params.total_mass() * cable.rho;
  d.rho_dot = cable.rho_dot;
  d.rho_ddot = -rho_dot_sq * cable.rho +
               cable.rho.cross(cable.rho.cross(force)) / (params.quad_mass * l);
  d.R_dot = state.R * so3::hat(state.omega);
  d.omega_dot = angular_accel(state.omega, moment, params);
  return d;
}

SlackDerivative slack_derivatives(const SystemState& state, double thrust_accel,
                                  const Vec3& moment, const PhysicalParams& params) {
  SlackDerivative d;
  d.x_q_dot = state.v_q;
  d.v_q_dot = params.gravity_vector() + thrust_accel * state.R.col(2);
  d.R_dot = state.R * so3::hat(state.omega);
  d.omega_dot = angular_accel(state.omega, moment, params);
  d.x_l_dot = state.v_l;
  d.v_l_dot = params.gravity_vector();
  return d;
}

Vec3 rate_moment(const Vec3& omega_cmd, const Vec3& omega, const PhysicalParams& params) {
  return params.inertia * params.rate_gain.cwiseProduct(omega_cmd - omega) +
         omega.cross(params.inertia * omega);
}

bool should_retaut(const SystemState& state, const PhysicalParams& params) {
  return separation(state) >= params.cable_length && separating(state, 0.0);
}

ImpulseResult slack_to_taut_impulse(const SystemState& state, const PhysicalParams& params) {
  const Vec3 rho = (state.x_l - state.x_q).normalized();
  const double radial = (state.v_l - state.v_q).dot(rho);
  if (!(radial > 0.0)) return {state, false};

  const double mq = params.quad_mass;
  const double ml = params.payload_mass;
  const double m = params.total_mass();
  const double l = params.cable_length;

  ImpulseResult out{state, true};
  SystemState& s = out.state;
  // Project onto |x_l - x_q| = l about the centre of mass.
  const Vec3 com = (mq * state.x_q + ml * state.x_l) / m;
  s.x_q = com - (ml / m) * l * rho;
  s.x_l = com + (mq / m) * l * rho;
  s.v_q = state.v_q + (ml / m) * radial * rho;
  s.v_l = state.v_l - (mq / m) * radial * rho;
  s.phase = CablePhase::kTaut;
  return out;
}

StepResult hybrid_step(const SystemState& state, const PhysicalCommand& command,
                       const PhysicalParams& params, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("hybrid_step: dt must be positive");
  check_finite(state);

  StepResult result{state, {}};
  SystemState& cur = result.state;
  StepEvents& ev = result.events;
  double remaining = dt;
  int transitions = 0;

  while (remaining > 0.0) {
    const bool may_transition = transitions < kMaxTransitionsPerStep;
    if (cur.phase == CablePhase::kTaut) {
      if (may_transition && tension_of(cur, command, params) < 0.0) {
        cur.phase = CablePhase::kSlack;
        ev.taut_to_slack = true;
        ++transitions;
        continue;
      }
      SystemState end = integrate_taut(cur, command, params, remaining);
      check_finite(end);
      if (!may_transition || tension_of(end, command, params) >= 0.0) {
        cur = end;
        break;
      }
      double lo = 0.0, hi = remaining;
      for (int i = 0; i < kBisectionIterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (tension_of(integrate_taut(cur, command, params, mid), command, params) >= 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      cur = integrate_taut(cur, command, params, hi);
      cur.phase = CablePhase::kSlack;
      ev.taut_to_slack = true;
      remaining -= hi;
      ++transitions;
    } else {
      const auto stretched = [&](const SystemState& s) {
        return separation(s) >= params.cable_length;
      };
      double tau = -1.0;
      if (may_transition && stretched(cur) && separating(cur, kSeparationTolerance)) {
        tau = 0.0;
      } else {
        SystemState end = integrate_slack(cur, command, params, remaining);
        check_finite(end);
        if (!may_transition || !stretched(end) || !separating(end, kSeparationTolerance)) {
          cur = end;
          break;
        }
        double lo = 0.0, hi = remaining;
        for (int i = 0; i < kBisectionIterations; ++i) {
          const double mid = 0.5 * (lo + hi);
          if (stretched(integrate_slack(cur, command, params, mid))) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        tau = hi;
        cur = integrate_slack(cur, command, params, tau);
      }
      remaining -= tau;
      ++transitions;

      ImpulseResult impulse = slack_to_taut_impulse(cur, params);
      if (!impulse.applied) {
        ev.retaut_rejected = true;
        continue;
      }
      SystemState contact = impulse.state;
      if (tension_of(contact, command, params) >= -kRetautTensionTolerance) {
        cur = contact;
        ev.slack_to_taut = true;
      } else {
        contact.phase = CablePhase::kSlack;
        cur = contact;
        ev.retaut_rejected = true;
      }
    }
  }
  check_finite(cur);
  cur.t = state.t + dt;
  return result;
}

double mechanical_energy(const SystemState& state, const PhysicalParams& params) {
  return kinetic_energy(state, params) +
         params.gravity * (params.quad_mass * state.x_q.z() + params.payload_mass * state.x_l.z());
}

double kinetic_energy(const SystemState& state, const PhysicalParams& params) {
  return 0.5 * params.quad_mass * state.v_q.squaredNorm() +
         0.5 * params.payload_mass * state.v_l.squaredNorm();
}

Vec3 linear_momentum(const SystemState& state, const PhysicalParams& params) {
  return params.quad_mass * state.v_q + params.payload_mass * state.v_l;
}

SystemState hover_state(const Vec3& x_q, const PhysicalParams& params, double t) {
  SystemState s;
  s.x_q = x_q;
  s.x_l = x_q - params.cable_length * Vec3::UnitZ();
  s.phase = CablePhase::kTaut;
  s.t = t;
  return s;
}

SystemState taut_state(const Vec3& x_l, const Vec3& v_l, const CableCoords& cable,
                       const Mat3& R, const Vec3& omega, const PhysicalParams& params,
                       double t) {
  SystemState s;
  s.x_l = x_l;
  s.v_l = v_l;
  s.x_q = x_l - params.cable_length * cable.rho;
  s.v_q = v_l - params.cable_length * cable.rho_dot;
  s.R = R;
  s.omega = omega;
  s.phase = CablePhase::kTaut;
  s.t = t;
  return s;
}

double cable_drift(const SystemState& state, const PhysicalParams& params) {
  return std::abs(separation(state) - params.cable_length);
}

}  // namespace slung
