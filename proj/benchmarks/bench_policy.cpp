#include "slung/policy.hpp"
#include "slung/ppo.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace slung;

void BM_PolicyMean(benchmark::State& state) {
  const PolicyConfig cfg;
  Rng rng(1);
  const ActorCritic ac(cfg, rng);
  const Eigen::MatrixXd obs = Eigen::MatrixXd::Random(cfg.input_size, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ac.mean(obs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PolicyMean)->Arg(1)->Arg(256);

void BM_LogProbGradient(benchmark::State& state) {
  const PolicyConfig cfg;
  Rng rng(2);
  const ActorCritic ac(cfg, rng);
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd obs = Eigen::MatrixXd::Random(cfg.input_size, n);
  const Eigen::MatrixXd actions = 0.5 * Eigen::MatrixXd::Random(cfg.action_size, n);
  const Eigen::VectorXd weights = Eigen::VectorXd::Ones(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_prob_gradient(ac, obs, actions, weights));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LogProbGradient)->Arg(512);

void BM_Gae(benchmark::State& state) {
  const Eigen::Index T = state.range(0);
  const Eigen::VectorXd rewards = Eigen::VectorXd::Random(T);
  const Eigen::VectorXd values = Eigen::VectorXd::Random(T + 1);
  std::vector<bool> dones(static_cast<std::size_t>(T), false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_gae(rewards, values, dones, 0.99, 0.95));
  }
}
BENCHMARK(BM_Gae)->Arg(32)->Arg(1500);

}  // namespace
