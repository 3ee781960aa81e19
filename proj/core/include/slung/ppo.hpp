#pragma once

#include "slung/policy.hpp"

#include <Eigen/Dense>

#include <vector>

namespace slung {

struct PpoConfig {
  double clip_ratio = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  int epochs = 4;
  int minibatches = 4;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int num_envs = 256;
  int horizon = 32;  // rollout steps per environment per iteration
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

// One environment's trajectory segment. `dones[t]` marks that the episode
// ended at step t; values has one extra bootstrap entry.
struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const std::vector<bool>& dones, double gamma, double lambda);

// Flattened rollout, one sample per column.
struct RolloutBatch {
  Eigen::MatrixXd observations;  // kObservationSize x M
  Eigen::MatrixXd actions;       // kActionSize x M
  Eigen::VectorXd log_probs;
  Eigen::VectorXd rewards;
  std::vector<bool> dones;
  Eigen::VectorXd values;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  Eigen::Index size() const { return observations.cols(); }
  void check_aligned() const;
};

// Mean 0, std 1 (population); constant vectors map to zero.
void normalize_advantages(Eigen::VectorXd& advantages);

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Clipped surrogate + value loss (mean over the given columns) and its
// gradient with respect to ac.flatten().
LossStats ppo_loss_and_gradient(const ActorCritic& ac, const RolloutBatch& batch,
                                const std::vector<Eigen::Index>& columns, const PpoConfig& cfg,
                                Eigen::VectorXd& gradient);

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, const PpoConfig& cfg);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  long steps() const { return t_; }

 private:
  Eigen::VectorXd m_, v_;
  double lr_ = 0.0, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
};

struct UpdateStats {
  LossStats loss;
  double grad_norm = 0.0;  // mean pre-clip norm over minibatches
  int minibatch_updates = 0;
  bool aborted = false;
};

// Epochs of shuffled minibatch updates. Advantages must already be
// normalized. A non-finite loss or gradient aborts before touching `ac`.
UpdateStats ppo_update(ActorCritic& ac, Adam& adam, const RolloutBatch& batch,
                       const PpoConfig& cfg, Rng& rng);

}  // namespace slung
