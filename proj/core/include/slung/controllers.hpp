#pragma once

#include "slung/env.hpp"
#include "slung/policy.hpp"

#include <memory>
#include <string_view>

namespace slung {

// Produces a normalized action for the environment's current state.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual Vec4 act(const Environment& env, const Observation& obs) = 0;
};

// Inverse of map_action (saturating).
Vec4 normalize_command(const PhysicalCommand& cmd, const PhysicalParams& params);

// Hover thrust for the nominal coupled system, zero rates.
class HoverController : public Controller {
 public:
  Vec4 act(const Environment& env, const Observation& obs) override;
};

class RandomController : public Controller {
 public:
  explicit RandomController(Rng rng) : rng_(std::move(rng)) {}
  Vec4 act(const Environment& env, const Observation& obs) override;

 private:
  Rng rng_;
};

// Deterministic policy mean.
class NetworkController : public Controller {
 public:
  explicit NetworkController(std::shared_ptr<const ActorCritic> model) : model_(std::move(model)) {}
  Vec4 act(const Environment& env, const Observation& obs) override;

 private:
  std::shared_ptr<const ActorCritic> model_;
};

// Scripted geometric tracker using the true state: follows the line through
// the current waypoint along its x axis at a cruise speed, with the waypoint
// yaw. Only meant for upright waypoints.
class TrackingController : public Controller {
 public:
  struct Gains {
    double cruise_speed = 1.5;  // m/s
    double lead = 0.5;          // m along the line
    double kp = 3.0;
    double kd = 3.0;
    double max_accel = 6.0;  // m/s^2
    double k_att = 8.0;
  };
  TrackingController() = default;
  explicit TrackingController(Gains gains) : gains_(gains) {}
  Vec4 act(const Environment& env, const Observation& obs) override;

 private:
  Gains gains_;
};

// hover, random, tracker.
std::unique_ptr<Controller> make_stub_controller(std::string_view name, Rng rng);

}  // namespace slung
