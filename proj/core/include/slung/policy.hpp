#pragma once

#include "slung/env.hpp"
#include "slung/mlp.hpp"

#include <Eigen/Dense>

#include <string>

namespace slung {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 1.0;

struct PolicyConfig {
  int input_size = kObservationSize;
  int action_size = kActionSize;
  int hidden_size = 128;
  int hidden_layers = 2;
  double init_log_std = -0.5;
  // Initial mean of the thrust action; -0.365 maps to hover thrust for the
  // default airframe.
  double init_thrust_mean = -0.365;
  double actor_output_gain = 0.01;
  double critic_output_gain = 1.0;

  void validate() const;
  // Canonical text of the shape-defining fields; hashed into checkpoints.
  std::string architecture() const;
  std::uint64_t fingerprint() const;
};

std::uint64_t fnv1a64(const std::string& text);

// Diagonal Gaussian log density.
double gaussian_log_prob(const Eigen::VectorXd& action, const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std);

// Separate policy and value MLPs plus a state-independent log-std. The
// policy mean is tanh of the actor output; actions are Gaussian around it,
// clamped to [-1, 1].
class ActorCritic {
 public:
  ActorCritic() = default;
  // Zero parameters, log-std at init_log_std.
  explicit ActorCritic(const PolicyConfig& cfg);
  ActorCritic(const PolicyConfig& cfg, Rng& rng);

  const PolicyConfig& config() const { return cfg_; }
  Mlp& actor() { return actor_; }
  const Mlp& actor() const { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& critic() const { return critic_; }
  Eigen::VectorXd& log_std() { return log_std_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }

  // Throws InvalidArgument on non-finite inputs.
  Eigen::MatrixXd mean(const Eigen::MatrixXd& obs) const;
  Eigen::VectorXd value(const Eigen::MatrixXd& obs) const;

  struct Sample {
    Eigen::MatrixXd actions;    // clamped
    Eigen::VectorXd log_probs;  // of the clamped actions
    Eigen::VectorXd values;
    Eigen::MatrixXd means;
  };
  // Column j draws its noise from rngs[j].
  Sample sample(const Eigen::MatrixXd& obs, std::vector<Rng*>& rngs) const;

  Eigen::VectorXd log_prob(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& actions) const;

  std::size_t parameter_count() const;
  // actor, critic, log-std.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  void clamp_log_std();
  bool finite() const;
  void set_zero();

 private:
  PolicyConfig cfg_;
  Mlp actor_;
  Mlp critic_;
  Eigen::VectorXd log_std_;
};

// Forward pass kept for backpropagation.
struct PolicyEvaluation {
  Eigen::MatrixXd means;
  Eigen::VectorXd log_probs;
  Eigen::VectorXd values;
  Mlp::Tape actor_tape;
  Mlp::Tape critic_tape;
};

PolicyEvaluation evaluate_policy(const ActorCritic& ac, const Eigen::MatrixXd& obs,
                                 const Eigen::MatrixXd& actions);

// Accumulates into `grad` the gradient of
//   sum_j lp_coef_j * log_prob_j + value_coef_j * value_j.
// `grad` is an ActorCritic of the same shape used as a container.
void backpropagate(const ActorCritic& ac, const PolicyEvaluation& eval,
                   const Eigen::MatrixXd& actions, const Eigen::VectorXd& lp_coef,
                   const Eigen::VectorXd& value_coef, ActorCritic& grad);

// Gradient of sum_j w_j * log_prob_j with respect to the flattened actor and
// log-std parameters (critic block left at zero).
Eigen::VectorXd log_prob_gradient(const ActorCritic& ac, const Eigen::MatrixXd& obs,
                                  const Eigen::MatrixXd& actions, const Eigen::VectorXd& weights);

}  // namespace slung
