#include "slung/controllers.hpp"

#include "slung/so3.hpp"

#include <algorithm>
#include <cmath>

namespace slung {

Vec4 normalize_command(const PhysicalCommand& cmd, const PhysicalParams& params) {
  Vec4 a;
  a[0] = 2.0 * cmd.thrust_accel / params.max_thrust_accel - 1.0;
  a.tail<3>() = cmd.body_rate.cwiseQuotient(params.max_body_rate);
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

Vec4 HoverController::act(const Environment& env, const Observation&) {
  PhysicalCommand cmd;
  cmd.thrust_accel = env.params().hover_thrust_accel();
  return normalize_command(cmd, env.params());
}

Vec4 RandomController::act(const Environment&, const Observation&) {
  Vec4 a;
  for (int i = 0; i < 4; ++i) a[i] = rng_.uniform(-1.0, 1.0);
  return a;
}

Vec4 NetworkController::act(const Environment&, const Observation& obs) {
  const Eigen::Map<const Eigen::VectorXd> x(obs.data(), kObservationSize);
  return model_->mean(x).col(0);
}

Vec4 TrackingController::act(const Environment& env, const Observation&) {
  const SystemState& s = env.state();
  const PhysicalParams& p = env.params();
  const Waypoint& wp = env.queue().current();
  const Vec3 x_t = wp.x_axis();
  const Vec3 g = p.gravity_vector();

  const double along = (s.x_q - wp.position).dot(x_t);
  const Vec3 aim = wp.position + (along + gains_.lead) * x_t;
  Vec3 a_des = gains_.kp * (aim - s.x_q) + gains_.kd * (gains_.cruise_speed * x_t - s.v_q);
  if (a_des.norm() > gains_.max_accel) a_des *= gains_.max_accel / a_des.norm();

  // Whole-system thrust, assuming the payload follows the quadrotor.
  const Vec3 f = a_des - g;
  const Vec3 z_d = f.normalized();
  const Vec3 heading(std::cos(wp.yaw), std::sin(wp.yaw), 0.0);
  Vec3 y_d = z_d.cross(heading);
  if (y_d.norm() < 1e-6) y_d = z_d.cross(Vec3::UnitX());
  y_d.normalize();
  Mat3 R_d;
  R_d.col(0) = y_d.cross(z_d);
  R_d.col(1) = y_d;
  R_d.col(2) = z_d;

  const Mat3 E = R_d.transpose() * s.R - s.R.transpose() * R_d;
  const Vec3 e_r = 0.5 * so3::vee(E);
  PhysicalCommand cmd;
  cmd.thrust_accel = std::max(0.0, p.total_mass() / p.quad_mass * f.dot(s.R.col(2)));
  cmd.body_rate = -gains_.k_att * e_r;
  return normalize_command(cmd, p);
}

std::unique_ptr<Controller> make_stub_controller(std::string_view name, Rng rng) {
  if (name == "hover") return std::make_unique<HoverController>();
  if (name == "random") return std::make_unique<RandomController>(std::move(rng));
  if (name == "tracker") return std::make_unique<TrackingController>();
  throw InvalidArgument("unknown stub controller '" + std::string(name) +
                        "' (expected hover, random or tracker)");
}

}  // namespace slung
