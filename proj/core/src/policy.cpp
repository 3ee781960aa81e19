#include "slung/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slung {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

void require_finite(const Eigen::MatrixXd& obs) {
  if (!obs.allFinite()) throw InvalidArgument("policy: non-finite observation");
}

std::vector<int> widths(const PolicyConfig& cfg, int out) {
  std::vector<int> w{cfg.input_size};
  for (int i = 0; i < cfg.hidden_layers; ++i) w.push_back(cfg.hidden_size);
  w.push_back(out);
  return w;
}

}  // namespace

void PolicyConfig::validate() const {
  if (input_size < 1 || action_size < 1 || hidden_size < 1 || hidden_layers < 1) {
    throw InvalidArgument("PolicyConfig: sizes must be positive");
  }
  if (init_log_std < kLogStdMin || init_log_std > kLogStdMax) {
    throw InvalidArgument("PolicyConfig: init_log_std outside [-5, 1]");
  }
  if (!(std::abs(init_thrust_mean) < 1.0)) {
    throw InvalidArgument("PolicyConfig: init_thrust_mean outside (-1, 1)");
  }
}

std::string PolicyConfig::architecture() const {
  std::ostringstream s;
  s << "obs=" << input_size << ";act=" << action_size << ";hidden=" << hidden_size
    << ";layers=" << hidden_layers << ";activation=tanh;head=tanh-gaussian;critic=separate";
  return s.str();
}

std::uint64_t PolicyConfig::fingerprint() const { return fnv1a64(architecture()); }

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double gaussian_log_prob(const Eigen::VectorXd& action, const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std) {
  const Eigen::ArrayXd z = (action - mean).array() * (-log_std.array()).exp();
  return (-0.5 * z.square() - log_std.array() - kHalfLog2Pi).sum();
}

ActorCritic::ActorCritic(const PolicyConfig& cfg)
    : cfg_(cfg),
      actor_(widths(cfg, cfg.action_size)),
      critic_(widths(cfg, 1)),
      log_std_(Eigen::VectorXd::Constant(cfg.action_size, cfg.init_log_std)) {
  cfg_.validate();
}

ActorCritic::ActorCritic(const PolicyConfig& cfg, Rng& rng) : ActorCritic(cfg) {
  actor_.init(rng, cfg.actor_output_gain);
  critic_.init(rng, cfg.critic_output_gain);
  actor_.bias(actor_.layer_count() - 1)(0) = std::atanh(cfg.init_thrust_mean);
}

Eigen::MatrixXd ActorCritic::mean(const Eigen::MatrixXd& obs) const {
  require_finite(obs);
  return actor_.forward(obs).array().tanh();
}

Eigen::VectorXd ActorCritic::value(const Eigen::MatrixXd& obs) const {
  require_finite(obs);
  return critic_.forward(obs).row(0).transpose();
}

ActorCritic::Sample ActorCritic::sample(const Eigen::MatrixXd& obs, std::vector<Rng*>& rngs) const {
  if (static_cast<Eigen::Index>(rngs.size()) != obs.cols()) {
    throw InvalidArgument("ActorCritic::sample: one rng per column required");
  }
  Sample s;
  s.means = mean(obs);
  s.values = value(obs);
  s.actions.resize(s.means.rows(), s.means.cols());
  s.log_probs.resize(obs.cols());
  const Eigen::VectorXd std_dev = log_std_.array().exp();
  for (Eigen::Index j = 0; j < obs.cols(); ++j) {
    for (Eigen::Index i = 0; i < s.means.rows(); ++i) {
      const double a = s.means(i, j) + std_dev[i] * rngs[static_cast<std::size_t>(j)]->normal();
      s.actions(i, j) = std::clamp(a, -1.0, 1.0);
    }
    s.log_probs[j] = gaussian_log_prob(s.actions.col(j), s.means.col(j), log_std_);
  }
  return s;
}

Eigen::VectorXd ActorCritic::log_prob(const Eigen::MatrixXd& obs,
                                      const Eigen::MatrixXd& actions) const {
  const Eigen::MatrixXd mu = mean(obs);
  Eigen::VectorXd out(obs.cols());
  for (Eigen::Index j = 0; j < obs.cols(); ++j) {
    out[j] = gaussian_log_prob(actions.col(j), mu.col(j), log_std_);
  }
  return out;
}

std::size_t ActorCritic::parameter_count() const {
  return actor_.parameter_count() + critic_.parameter_count() +
         static_cast<std::size_t>(log_std_.size());
}

Eigen::VectorXd ActorCritic::flatten() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count()));
  const auto na = static_cast<Eigen::Index>(actor_.parameter_count());
  const auto nc = static_cast<Eigen::Index>(critic_.parameter_count());
  actor_.flatten_into(out, 0);
  critic_.flatten_into(out, na);
  out.segment(na + nc, log_std_.size()) = log_std_;
  return out;
}

void ActorCritic::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw InvalidArgument("ActorCritic::assign: size mismatch");
  }
  const auto na = static_cast<Eigen::Index>(actor_.parameter_count());
  const auto nc = static_cast<Eigen::Index>(critic_.parameter_count());
  actor_.assign_from(flat, 0);
  critic_.assign_from(flat, na);
  log_std_ = flat.segment(na + nc, log_std_.size());
}

void ActorCritic::clamp_log_std() { log_std_ = log_std_.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax); }

bool ActorCritic::finite() const {
  return actor_.finite() && critic_.finite() && log_std_.allFinite();
}

void ActorCritic::set_zero() {
  actor_.set_zero();
  critic_.set_zero();
  log_std_.setZero();
}

PolicyEvaluation evaluate_policy(const ActorCritic& ac, const Eigen::MatrixXd& obs,
                                 const Eigen::MatrixXd& actions) {
  require_finite(obs);
  PolicyEvaluation e;
  e.means = ac.actor().forward(obs, e.actor_tape).array().tanh();
  e.values = ac.critic().forward(obs, e.critic_tape).row(0).transpose();
  e.log_probs.resize(obs.cols());
  for (Eigen::Index j = 0; j < obs.cols(); ++j) {
    e.log_probs[j] = gaussian_log_prob(actions.col(j), e.means.col(j), ac.log_std());
  }
  return e;
}

void backpropagate(const ActorCritic& ac, const PolicyEvaluation& eval,
                   const Eigen::MatrixXd& actions, const Eigen::VectorXd& lp_coef,
                   const Eigen::VectorXd& value_coef, ActorCritic& grad) {
  const Eigen::ArrayXd inv_var = (-2.0 * ac.log_std().array()).exp();
  const Eigen::ArrayXXd diff = (actions - eval.means).array();
  // d log_prob / d mean, then through tanh.
  Eigen::ArrayXXd d_pre = diff.colwise() * inv_var;
  d_pre *= 1.0 - eval.means.array().square();
  d_pre.rowwise() *= lp_coef.transpose().array();
  ac.actor().backward(eval.actor_tape, d_pre.matrix(), grad.actor());

  const Eigen::ArrayXXd d_log_std = diff.square().colwise() * inv_var - 1.0;
  grad.log_std() += (d_log_std.rowwise() * lp_coef.transpose().array()).rowwise().sum().matrix();

  if (value_coef.size() > 0 && value_coef.cwiseAbs().maxCoeff() > 0.0) {
    ac.critic().backward(eval.critic_tape, value_coef.transpose(), grad.critic());
  }
}

Eigen::VectorXd log_prob_gradient(const ActorCritic& ac, const Eigen::MatrixXd& obs,
                                  const Eigen::MatrixXd& actions, const Eigen::VectorXd& weights) {
  ActorCritic grad(ac.config());
  grad.set_zero();
  const PolicyEvaluation eval = evaluate_policy(ac, obs, actions);
  backpropagate(ac, eval, actions, weights, Eigen::VectorXd::Zero(obs.cols()), grad);
  return grad.flatten();
}

}  // namespace slung
