#pragma once

#include "slung/config.hpp"
#include "slung/env.hpp"
#include "slung/ppo.hpp"

#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace slung {

struct IterationMetrics {
  int iteration = 0;
  long total_steps = 0;
  // Rolling means over the last train.log_window completed episodes; NaN
  // until the first episode ends.
  double mean_reward = 0.0;
  double mean_length = 0.0;
  double mean_traversals = 0.0;
  int episodes_completed = 0;  // during this iteration
  UpdateStats update;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const IterationMetrics& m);

// Vectorized PPO over ppo.num_envs environments. Each environment owns an rng
// stream split from train.seed, as does each environment's action noise, so
// a run is reproducible for any worker count.
class Trainer {
 public:
  explicit Trainer(RunConfig cfg);

  IterationMetrics iterate();

  const ActorCritic& model() const { return model_; }
  ActorCritic& model() { return model_; }
  int iteration() const { return iteration_; }
  long total_steps() const { return total_steps_; }
  const RunConfig& config() const { return cfg_; }

 private:
  RunConfig cfg_;
  std::vector<Environment> envs_;
  std::vector<Rng> noise_;
  std::vector<Observation> obs_;
  Rng update_rng_;
  ActorCritic model_;
  Adam adam_;
  std::deque<EpisodeStats> window_;
  int iteration_ = 0;
  long total_steps_ = 0;
};

using IterationCallback = std::function<bool(const IterationMetrics&, const Trainer&)>;

// Runs cfg.train.iterations iterations; the callback may return false to stop
// early. Returns the per-iteration history.
std::vector<IterationMetrics> train(Trainer& trainer, const IterationCallback& callback = {});

}  // namespace slung
