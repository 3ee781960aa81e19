#include "slung/trainer.hpp"

#include "slung/csv.hpp"
#include "slung/parallel.hpp"

#include <cmath>
#include <limits>

namespace slung {
namespace {

constexpr std::uint64_t kEnvStreams = 0;
constexpr std::uint64_t kNoiseStreams = 1u << 20;
constexpr std::uint64_t kModelStream = 1u << 21;
constexpr std::uint64_t kUpdateStream = (1u << 21) + 1;

Eigen::MatrixXd stack(const std::vector<Observation>& obs) {
  Eigen::MatrixXd m(kObservationSize, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(obs[i].data(), kObservationSize);
  }
  return m;
}

}  // namespace

std::string metrics_csv_header() {
  return "iteration,total_steps,mean_reward,mean_length,mean_traversals,episodes,"
         "policy_loss,value_loss,approx_kl,clip_fraction";
}

std::string metrics_csv_row(const IterationMetrics& m) {
  return csv_join({std::to_string(m.iteration), std::to_string(m.total_steps),
                   csv_number(m.mean_reward), csv_number(m.mean_length),
                   csv_number(m.mean_traversals), std::to_string(m.episodes_completed),
                   csv_number(m.update.loss.policy_loss), csv_number(m.update.loss.value_loss),
                   csv_number(m.update.loss.approx_kl), csv_number(m.update.loss.clip_fraction)});
}

Trainer::Trainer(RunConfig cfg)
    : cfg_(std::move(cfg)), update_rng_(Rng(cfg_.train.seed).split(kUpdateStream)) {
  cfg_.validate();
  const Rng root(cfg_.train.seed);
  Rng model_rng = root.split(kModelStream);
  model_ = ActorCritic(cfg_.policy, model_rng);
  adam_ = Adam(model_.parameter_count(), cfg_.ppo);
  const int n = cfg_.ppo.num_envs;
  envs_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    envs_.emplace_back(cfg_.env, root.split(kEnvStreams + static_cast<std::uint64_t>(i)));
    noise_.push_back(root.split(kNoiseStreams + static_cast<std::uint64_t>(i)));
  }
  obs_.resize(envs_.size());
  parallel_for(envs_.size(), [&](std::size_t i) { obs_[i] = envs_[i].reset(); });
}

IterationMetrics Trainer::iterate() {
  const auto n = static_cast<Eigen::Index>(envs_.size());
  const Eigen::Index H = cfg_.ppo.horizon;
  const Eigen::Index M = n * H;

  RolloutBatch batch;
  batch.observations.resize(kObservationSize, M);
  batch.actions.resize(kActionSize, M);
  batch.log_probs.resize(M);
  batch.rewards.resize(M);
  batch.values.resize(M);
  batch.dones.assign(static_cast<std::size_t>(M), false);

  std::vector<Rng*> noise_ptrs;
  for (auto& r : noise_) noise_ptrs.push_back(&r);

  IterationMetrics metrics;
  std::vector<StepOutcome> outcomes(envs_.size());
  for (Eigen::Index t = 0; t < H; ++t) {
    const Eigen::MatrixXd obs = stack(obs_);
    const ActorCritic::Sample s = model_.sample(obs, noise_ptrs);
    const Eigen::Index base = t * n;
    batch.observations.middleCols(base, n) = obs;
    batch.actions.middleCols(base, n) = s.actions;
    batch.log_probs.segment(base, n) = s.log_probs;
    batch.values.segment(base, n) = s.values;

    parallel_for(envs_.size(), [&](std::size_t i) {
      outcomes[i] = envs_[i].step(s.actions.col(static_cast<Eigen::Index>(i)));
    });
    for (std::size_t i = 0; i < envs_.size(); ++i) {
      const auto col = base + static_cast<Eigen::Index>(i);
      batch.rewards[col] = outcomes[i].reward.total();
      batch.dones[static_cast<std::size_t>(col)] = outcomes[i].done;
      if (outcomes[i].done) {
        window_.push_back(envs_[i].episode());
        if (static_cast<int>(window_.size()) > cfg_.train.log_window) window_.pop_front();
        ++metrics.episodes_completed;
      }
    }
    parallel_for(envs_.size(), [&](std::size_t i) {
      obs_[i] = outcomes[i].done ? envs_[i].reset() : outcomes[i].observation;
    });
  }
  total_steps_ += M;

  const Eigen::VectorXd bootstrap = model_.value(stack(obs_));
  batch.advantages.resize(M);
  batch.returns.resize(M);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd r(H), v(H + 1);
    std::vector<bool> d(static_cast<std::size_t>(H));
    for (Eigen::Index t = 0; t < H; ++t) {
      r[t] = batch.rewards[t * n + i];
      v[t] = batch.values[t * n + i];
      d[static_cast<std::size_t>(t)] = batch.dones[static_cast<std::size_t>(t * n + i)];
    }
    v[H] = bootstrap[i];
    const GaeResult g = compute_gae(r, v, d, cfg_.ppo.gamma, cfg_.ppo.gae_lambda);
    for (Eigen::Index t = 0; t < H; ++t) {
      batch.advantages[t * n + i] = g.advantages[t];
      batch.returns[t * n + i] = g.returns[t];
    }
  }
  normalize_advantages(batch.advantages);
  metrics.update = ppo_update(model_, adam_, batch, cfg_.ppo, update_rng_);

  ++iteration_;
  metrics.iteration = iteration_;
  metrics.total_steps = total_steps_;
  if (window_.empty()) {
    metrics.mean_reward = metrics.mean_length = metrics.mean_traversals =
        std::numeric_limits<double>::quiet_NaN();
  } else {
    double r = 0.0, l = 0.0, k = 0.0;
    for (const EpisodeStats& e : window_) {
      r += e.total_reward;
      l += e.length;
      k += e.traversals;
    }
    const double inv = 1.0 / static_cast<double>(window_.size());
    metrics.mean_reward = r * inv;
    metrics.mean_length = l * inv;
    metrics.mean_traversals = k * inv;
  }
  return metrics;
}

std::vector<IterationMetrics> train(Trainer& trainer, const IterationCallback& callback) {
  std::vector<IterationMetrics> history;
  for (int i = 0; i < trainer.config().train.iterations; ++i) {
    history.push_back(trainer.iterate());
    if (callback && !callback(history.back(), trainer)) break;
  }
  return history;
}

}  // namespace slung
