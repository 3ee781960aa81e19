#include "slung/checkpoint.hpp"
#include "slung/policy.hpp"
#include "slung/ppo.hpp"
#include "slung/trainer.hpp"

#include "oracles/finite_difference.hpp"
#include "oracles/gae_bruteforce.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

namespace slung {
namespace {

PolicyConfig toy_config() {
  PolicyConfig c;
  c.input_size = 5;
  c.action_size = 2;
  c.hidden_size = 4;
  c.hidden_layers = 2;
  return c;
}

// Toy net with non-trivial weights in every layer, including the output.
ActorCritic toy_model(std::uint64_t seed) {
  PolicyConfig c = toy_config();
  c.actor_output_gain = 1.0;
  Rng rng(seed);
  ActorCritic ac(c, rng);
  ac.log_std() << -0.3, 0.2;
  return ac;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.uniform(-1.0, 1.0);
  }
  return m;
}

RolloutBatch toy_batch(const ActorCritic& ac, Eigen::Index m, Rng& rng) {
  RolloutBatch b;
  b.observations = random_matrix(ac.config().input_size, m, rng);
  b.actions = random_matrix(ac.config().action_size, m, rng, 0.9);
  b.log_probs = ac.log_prob(b.observations, b.actions);
  for (Eigen::Index j = 0; j < m; ++j) b.log_probs[j] += rng.uniform(-0.1, 0.1);
  b.rewards = Eigen::VectorXd::Zero(m);
  b.dones.assign(static_cast<std::size_t>(m), false);
  b.values = ac.value(b.observations);
  b.advantages = random_matrix(m, 1, rng);
  b.returns = b.values + random_matrix(m, 1, rng);
  return b;
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

TEST(Policy, ZeroWeightsGiveZeroMean) {
  ActorCritic ac(PolicyConfig{});
  ac.set_zero();
  Rng rng(1);
  const Eigen::MatrixXd obs = random_matrix(kObservationSize, 16, rng);
  EXPECT_TRUE(ac.mean(obs).isZero(0.0));
  EXPECT_TRUE(ac.value(obs).isZero(0.0));
}

TEST(Policy, MeansAndSamplesStayInRange) {
  PolicyConfig c;
  c.actor_output_gain = 10.0;
  c.init_log_std = 1.0;
  Rng init(2);
  const ActorCritic ac(c, init);
  Rng rng(3);
  const Eigen::MatrixXd obs = random_matrix(kObservationSize, 64, rng, 5.0);
  std::vector<Rng> streams;
  for (int i = 0; i < 64; ++i) streams.push_back(Rng(4).split(static_cast<std::uint64_t>(i)));
  std::vector<Rng*> ptrs;
  for (auto& r : streams) ptrs.push_back(&r);
  const ActorCritic::Sample s = ac.sample(obs, ptrs);
  EXPECT_LE(s.means.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_LE(s.actions.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_TRUE(s.log_probs.isApprox(ac.log_prob(obs, s.actions)));
}

TEST(Policy, InitialThrustMean) {
  PolicyConfig c;
  Rng rng(5);
  const ActorCritic ac(c, rng);
  const Eigen::MatrixXd obs = Eigen::MatrixXd::Zero(kObservationSize, 1);
  EXPECT_NEAR(ac.mean(obs)(0, 0), c.init_thrust_mean, 1e-12);
}

TEST(Policy, RejectsNonFiniteObservation) {
  const ActorCritic ac(PolicyConfig{});
  Eigen::MatrixXd obs = Eigen::MatrixXd::Zero(kObservationSize, 1);
  obs(3, 0) = std::nan("");
  EXPECT_THROW(ac.mean(obs), InvalidArgument);
}

TEST(Policy, LogProbGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ActorCritic ac = toy_model(seed);
    Rng rng(seed + 10);
    const Eigen::MatrixXd obs = random_matrix(5, 7, rng);
    const Eigen::MatrixXd act = random_matrix(2, 7, rng, 0.9);
    const Eigen::VectorXd w = random_matrix(7, 1, rng);
    const Eigen::VectorXd analytic = log_prob_gradient(ac, obs, act, w);
    auto f = [&](const Eigen::VectorXd& flat) {
      ActorCritic probe = ac;
      probe.assign(flat);
      return w.dot(probe.log_prob(obs, act));
    };
    const Eigen::VectorXd fd = oracle::central_difference(f, ac.flatten(), 1e-6);
    EXPECT_LE(relative_error(analytic, fd), 1e-4) << "seed " << seed;
  }
}

TEST(Ppo, LossGradientMatchesFiniteDifferences) {
  const ActorCritic ac = toy_model(4);
  Rng rng(5);
  const RolloutBatch b = toy_batch(ac, 9, rng);
  PpoConfig cfg;
  cfg.entropy_coef = 0.01;
  std::vector<Eigen::Index> cols(9);
  for (Eigen::Index j = 0; j < 9; ++j) cols[static_cast<std::size_t>(j)] = j;
  Eigen::VectorXd analytic;
  ppo_loss_and_gradient(ac, b, cols, cfg, analytic);
  auto f = [&](const Eigen::VectorXd& flat) {
    ActorCritic probe = ac;
    probe.assign(flat);
    Eigen::VectorXd unused;
    const LossStats s = ppo_loss_and_gradient(probe, b, cols, cfg, unused);
    return s.policy_loss + cfg.value_coef * s.value_loss - cfg.entropy_coef * s.entropy;
  };
  const Eigen::VectorXd fd = oracle::central_difference(f, ac.flatten(), 1e-6);
  EXPECT_LE(relative_error(analytic, fd), 1e-4);
}

TEST(Ppo, ClippedBranchHasNoPolicyGradient) {
  const ActorCritic ac = toy_model(6);
  Rng rng(7);
  RolloutBatch b = toy_batch(ac, 8, rng);
  // Ratio 2 with positive advantages selects the clipped objective.
  b.log_probs = ac.log_prob(b.observations, b.actions).array() - std::log(2.0);
  b.advantages.setOnes();
  b.returns = b.values;
  std::vector<Eigen::Index> cols{0, 1, 2, 3, 4, 5, 6, 7};
  Eigen::VectorXd g;
  const LossStats s = ppo_loss_and_gradient(ac, b, cols, PpoConfig{}, g);
  EXPECT_TRUE(g.isZero(0.0));
  EXPECT_NEAR(s.policy_loss, -1.2, 1e-12);
  EXPECT_NEAR(s.clip_fraction, 1.0, 1e-12);
}

TEST(Ppo, ZeroAdvantagesGiveZeroActorGradient) {
  const ActorCritic ac = toy_model(8);
  Rng rng(9);
  RolloutBatch b = toy_batch(ac, 8, rng);
  b.advantages.setZero();
  std::vector<Eigen::Index> cols{0, 1, 2, 3, 4, 5, 6, 7};
  Eigen::VectorXd g;
  ppo_loss_and_gradient(ac, b, cols, PpoConfig{}, g);
  const auto actor = static_cast<Eigen::Index>(ac.actor().parameter_count());
  const auto critic = static_cast<Eigen::Index>(ac.critic().parameter_count());
  EXPECT_TRUE(g.head(actor).isZero(0.0));
  EXPECT_TRUE(g.tail(ac.log_std().size()).isZero(0.0));
  EXPECT_FALSE(g.segment(actor, critic).isZero());
}

TEST(Gae, MatchesBruteForceWithRandomDones) {
  Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 1 + static_cast<int>(rng.index(64));
    std::vector<double> r(T), v(T + 1);
    std::vector<bool> d(T);
    for (int t = 0; t < T; ++t) {
      r[t] = rng.uniform(-10, 10);
      d[t] = rng.bernoulli(0.1);
    }
    for (double& x : v) x = rng.uniform(-5, 5);
    const double gamma = rng.uniform(0.0, 0.999), lambda = rng.uniform(0.0, 1.0);
    const GaeResult g = compute_gae(Eigen::Map<Eigen::VectorXd>(r.data(), T),
                                    Eigen::Map<Eigen::VectorXd>(v.data(), T + 1), d, gamma, lambda);
    const std::vector<double> expected = oracle::gae_bruteforce(r, v, d, gamma, lambda);
    for (int t = 0; t < T; ++t) {
      EXPECT_NEAR(g.advantages[t], expected[t], 1e-10);
      EXPECT_NEAR(g.returns[t], expected[t] + v[t], 1e-10);
    }
  }
}

TEST(Gae, DegenerateDiscounts) {
  const Eigen::VectorXd r = Eigen::Vector3d(1.0, 2.0, 3.0);
  const Eigen::VectorXd v = Eigen::Vector4d(0.5, 0.5, 0.5, 0.5);
  const std::vector<bool> d{false, false, false};
  const GaeResult g0 = compute_gae(r, v, d, 0.0, 0.95);
  EXPECT_TRUE(g0.advantages.isApprox(Eigen::Vector3d(0.5, 1.5, 2.5)));
  const GaeResult td = compute_gae(r, v, d, 0.9, 0.0);
  EXPECT_NEAR(td.advantages[1], 2.0 + 0.9 * 0.5 - 0.5, 1e-15);
  EXPECT_THROW(compute_gae(r, r, d, 0.9, 0.9), InvalidArgument);
}

TEST(Ppo, AdvantageNormalization) {
  Eigen::VectorXd a(4);
  a << 1.0, 2.0, 3.0, 4.0;
  normalize_advantages(a);
  EXPECT_NEAR(a.mean(), 0.0, 1e-15);
  EXPECT_NEAR(a.squaredNorm() / 4.0, 1.0, 1e-12);
  Eigen::VectorXd c = Eigen::VectorXd::Constant(3, 7.0);
  normalize_advantages(c);
  EXPECT_TRUE(c.isZero(0.0));
}

TEST(Ppo, UpdateIsDeterministicAndFinite) {
  const ActorCritic start = toy_model(11);
  Rng data(12);
  RolloutBatch b = toy_batch(start, 64, data);
  normalize_advantages(b.advantages);
  PpoConfig cfg;
  auto run = [&] {
    ActorCritic ac = start;
    Adam adam(ac.parameter_count(), cfg);
    Rng rng(13);
    const UpdateStats s = ppo_update(ac, adam, b, cfg, rng);
    EXPECT_FALSE(s.aborted);
    EXPECT_EQ(s.minibatch_updates, cfg.epochs * cfg.minibatches);
    return ac.flatten();
  };
  const Eigen::VectorXd a = run();
  EXPECT_EQ(a, run());
  EXPECT_NE(a, start.flatten());
}

TEST(Ppo, NonFiniteBatchAbortsWithoutChanges) {
  ActorCritic ac = toy_model(14);
  Rng data(15);
  RolloutBatch b = toy_batch(ac, 16, data);
  b.returns[3] = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd before = ac.flatten();
  PpoConfig cfg;
  Adam adam(ac.parameter_count(), cfg);
  Rng rng(1);
  EXPECT_TRUE(ppo_update(ac, adam, b, cfg, rng).aborted);
  EXPECT_EQ(ac.flatten(), before);
}

TEST(Checkpoint, RoundTripAndFingerprint) {
  Checkpoint c{toy_model(16), 42, {{"note", "toy"}}};
  const Checkpoint back = checkpoint_from_string(checkpoint_to_string(c), toy_config());
  EXPECT_EQ(back.model.flatten(), c.model.flatten());
  EXPECT_EQ(back.iteration, 42);
  EXPECT_EQ(back.metadata.at("note"), "toy");

  PolicyConfig other = toy_config();
  other.hidden_size = 5;
  EXPECT_NE(other.fingerprint(), toy_config().fingerprint());
  EXPECT_THROW(checkpoint_from_string(checkpoint_to_string(c), other), FingerprintMismatch);
  EXPECT_THROW(checkpoint_from_string("{\"format\": 1}", toy_config()), ParseError);
}

TEST(Checkpoint, InitOnlyFieldsDoNotChangeFingerprint) {
  PolicyConfig a, b;
  b.init_log_std = -1.0;
  b.init_thrust_mean = 0.0;
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
}

TEST(Trainer, ZeroIterationsLeaveModelUntouched) {
  RunConfig cfg = test::tiny_run_config();
  cfg.train.iterations = 0;
  Trainer a(cfg), b(cfg);
  EXPECT_TRUE(train(a).empty());
  EXPECT_EQ(a.model().flatten(), b.model().flatten());
}

TEST(Trainer, EpisodesRespectMaxLength) {
  RunConfig cfg = test::tiny_run_config();
  cfg.env.max_episode_steps = 10;
  cfg.env.reset_mode = ResetMode::kHover;
  Trainer t(cfg);
  const IterationMetrics m = t.iterate();
  EXPECT_GT(m.episodes_completed, 0);
  EXPECT_LE(m.mean_length, 10.0);
  EXPECT_EQ(m.total_steps, 4 * 16);
}

TEST(Trainer, DeterministicAcrossWorkerCounts) {
  auto run = [](const char* workers) {
    ::setenv("SLUNG_NUM_WORKERS", workers, 1);
    RunConfig cfg = test::tiny_run_config(3);
    cfg.ppo.num_envs = 6;
    Trainer t(cfg);
    std::string rows;
    for (const IterationMetrics& m : train(t)) rows += metrics_csv_row(m) + "\n";
    ::unsetenv("SLUNG_NUM_WORKERS");
    return std::make_pair(rows, t.model().flatten());
  };
  const auto one = run("1");
  const auto three = run("3");
  EXPECT_EQ(one.first, three.first);
  EXPECT_EQ(one.second, three.second);
}

}  // namespace
}  // namespace slung
