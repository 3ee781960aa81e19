#include "slung/ppo.hpp"

#include "slung/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slung {
namespace {

// Gradient work is split in fixed-size chunks and summed in chunk order, so
// the result does not depend on the worker count.
constexpr Eigen::Index kChunk = 256;

}  // namespace

void PpoConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("PpoConfig: gamma must lie in [0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw InvalidArgument("PpoConfig: gae_lambda must lie in [0, 1]");
  }
  if (!(clip_ratio > 0.0)) throw InvalidArgument("PpoConfig: clip_ratio must be positive");
  if (!(learning_rate > 0.0)) throw InvalidArgument("PpoConfig: learning_rate must be positive");
  if (epochs < 1 || minibatches < 1 || num_envs < 1 || horizon < 1) {
    throw InvalidArgument("PpoConfig: epochs, minibatches, num_envs, horizon must be >= 1");
  }
  if (!(max_grad_norm > 0.0)) throw InvalidArgument("PpoConfig: max_grad_norm must be positive");
}

GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const std::vector<bool>& dones, double gamma, double lambda) {
  const Eigen::Index T = rewards.size();
  if (values.size() != T + 1 || static_cast<Eigen::Index>(dones.size()) != T) {
    throw InvalidArgument("compute_gae: values needs T+1 entries and dones T");
  }
  GaeResult out;
  out.advantages.resize(T);
  double running = 0.0;
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const double live = dones[static_cast<std::size_t>(t)] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * values[t + 1] * live - values[t];
    running = delta + gamma * lambda * live * running;
    out.advantages[t] = running;
  }
  out.returns = out.advantages + values.head(T);
  return out;
}

void RolloutBatch::check_aligned() const {
  const Eigen::Index m = observations.cols();
  if (actions.cols() != m || log_probs.size() != m || rewards.size() != m ||
      static_cast<Eigen::Index>(dones.size()) != m || values.size() != m ||
      advantages.size() != m || returns.size() != m) {
    throw InvalidArgument("RolloutBatch: misaligned lengths");
  }
}

void normalize_advantages(Eigen::VectorXd& advantages) {
  if (advantages.size() == 0) return;
  const double mean = advantages.mean();
  advantages.array() -= mean;
  const double std_dev = std::sqrt(advantages.squaredNorm() / static_cast<double>(advantages.size()));
  if (std_dev > 1e-12) {
    advantages /= std_dev;
  } else {
    advantages.setZero();
  }
}

LossStats ppo_loss_and_gradient(const ActorCritic& ac, const RolloutBatch& batch,
                                const std::vector<Eigen::Index>& columns, const PpoConfig& cfg,
                                Eigen::VectorXd& gradient) {
  const auto m = static_cast<Eigen::Index>(columns.size());
  const Eigen::Index chunks = (m + kChunk - 1) / kChunk;
  struct Partial {
    ActorCritic grad;
    double policy_loss = 0.0, value_loss = 0.0, kl = 0.0, clipped = 0.0;
  };
  std::vector<Partial> parts(static_cast<std::size_t>(chunks));
  const double inv_m = 1.0 / static_cast<double>(m);

  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunk;
    const Eigen::Index n = std::min(kChunk, m - begin);
    Eigen::MatrixXd obs(batch.observations.rows(), n);
    Eigen::MatrixXd act(batch.actions.rows(), n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index j = columns[static_cast<std::size_t>(begin + k)];
      obs.col(k) = batch.observations.col(j);
      act.col(k) = batch.actions.col(j);
    }
    const PolicyEvaluation eval = evaluate_policy(ac, obs, act);
    Eigen::VectorXd lp_coef(n), v_coef(n);
    Partial& p = parts[c];
    p.grad = ActorCritic(ac.config());
    p.grad.set_zero();
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index j = columns[static_cast<std::size_t>(begin + k)];
      const double adv = batch.advantages[j];
      const double log_ratio = eval.log_probs[k] - batch.log_probs[j];
      const double ratio = std::exp(log_ratio);
      const double clipped = std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
      const double unclipped_obj = ratio * adv;
      const double clipped_obj = clipped * adv;
      // The minimum selects the branch; the clipped branch is constant in
      // the parameters whenever it is strictly smaller.
      const bool use_clipped = clipped_obj < unclipped_obj;
      p.policy_loss -= std::min(unclipped_obj, clipped_obj) * inv_m;
      lp_coef[k] = use_clipped ? 0.0 : -adv * ratio * inv_m;
      const double verr = eval.values[k] - batch.returns[j];
      p.value_loss += 0.5 * verr * verr * inv_m;
      v_coef[k] = cfg.value_coef * verr * inv_m;
      p.kl += ((ratio - 1.0) - log_ratio) * inv_m;
      if (std::abs(ratio - 1.0) > cfg.clip_ratio) p.clipped += inv_m;
    }
    backpropagate(ac, eval, act, lp_coef, v_coef, p.grad);
  });

  LossStats stats;
  ActorCritic total(ac.config());
  total.set_zero();
  Eigen::VectorXd flat = total.flatten();
  for (const Partial& p : parts) {
    flat += p.grad.flatten();
    stats.policy_loss += p.policy_loss;
    stats.value_loss += p.value_loss;
    stats.approx_kl += p.kl;
    stats.clip_fraction += p.clipped;
  }
  // Entropy of the diagonal Gaussian depends only on the log-std.
  const double half_log_2pi_e = 0.5 * std::log(2.0 * kPi * std::exp(1.0));
  stats.entropy = (ac.log_std().array() + half_log_2pi_e).sum();
  const auto ls = static_cast<Eigen::Index>(ac.log_std().size());
  flat.tail(ls).array() -= cfg.entropy_coef;
  gradient = flat;
  return stats;
}

Adam::Adam(std::size_t size, const PpoConfig& cfg)
    : m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      lr_(cfg.learning_rate),
      b1_(cfg.adam_beta1),
      b2_(cfg.adam_beta2),
      eps_(cfg.adam_epsilon) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = b1_ * m_ + (1.0 - b1_) * grad;
  v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

UpdateStats ppo_update(ActorCritic& ac, Adam& adam, const RolloutBatch& batch,
                       const PpoConfig& cfg, Rng& rng) {
  batch.check_aligned();
  UpdateStats stats;
  const Eigen::Index m = batch.size();
  if (m == 0) return stats;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::Index mb = std::max<Eigen::Index>(1, m / cfg.minibatches);

  Eigen::VectorXd params = ac.flatten();
  ActorCritic trial = ac;
  Eigen::VectorXd grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (Eigen::Index start = 0; start + mb <= m; start += mb) {
      std::vector<Eigen::Index> cols(order.begin() + start, order.begin() + start + mb);
      const LossStats loss = ppo_loss_and_gradient(trial, batch, cols, cfg, grad);
      const double total = loss.policy_loss + cfg.value_coef * loss.value_loss -
                           cfg.entropy_coef * loss.entropy;
      if (!std::isfinite(total) || !grad.allFinite()) {
        stats.aborted = true;
        return stats;
      }
      const double norm = grad.norm();
      if (norm > cfg.max_grad_norm) grad *= cfg.max_grad_norm / norm;
      adam.step(params, grad);
      trial.assign(params);
      trial.clamp_log_std();
      params = trial.flatten();

      stats.loss.policy_loss += loss.policy_loss;
      stats.loss.value_loss += loss.value_loss;
      stats.loss.entropy += loss.entropy;
      stats.loss.approx_kl += loss.approx_kl;
      stats.loss.clip_fraction += loss.clip_fraction;
      stats.grad_norm += norm;
      ++stats.minibatch_updates;
    }
  }
  if (!trial.finite()) {
    stats.aborted = true;
    return stats;
  }
  ac = trial;
  if (stats.minibatch_updates > 0) {
    const double k = 1.0 / stats.minibatch_updates;
    stats.loss.policy_loss *= k;
    stats.loss.value_loss *= k;
    stats.loss.entropy *= k;
    stats.loss.approx_kl *= k;
    stats.loss.clip_fraction *= k;
    stats.grad_norm *= k;
  }
  return stats;
}

}  // namespace slung
