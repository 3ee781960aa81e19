#include "slung/mlp.hpp"

#include "slung/types.hpp"

#include <cmath>

namespace slung {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw InvalidArgument("Mlp: need at least input and output widths");
  for (int s : sizes_) {
    if (s < 1) throw InvalidArgument("Mlp: layer widths must be positive");
  }
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    weights_.push_back(Eigen::MatrixXd::Zero(sizes_[i + 1], sizes_[i]));
    biases_.push_back(Eigen::VectorXd::Zero(sizes_[i + 1]));
  }
}

void Mlp::init(Rng& rng, double output_gain) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(weights_[l].cols())) *
                         (l + 1 == weights_.size() ? output_gain : 1.0);
    for (Eigen::Index j = 0; j < weights_[l].cols(); ++j) {
      for (Eigen::Index i = 0; i < weights_[l].rows(); ++i) {
        weights_[l](i, j) = scale * rng.normal();
      }
    }
    biases_[l].setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * h;
    z.colwise() += biases_[l];
    h = (l + 1 == weights_.size()) ? z : Eigen::MatrixXd(z.array().tanh());
  }
  return h;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Tape& tape) const {
  tape.activations.clear();
  tape.activations.push_back(x);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * tape.activations.back();
    z.colwise() += biases_[l];
    if (l + 1 == weights_.size()) return z;
    tape.activations.push_back(z.array().tanh().matrix());
  }
  return {};
}

void Mlp::backward(const Tape& tape, const Eigen::MatrixXd& d_out, Mlp& grad) const {
  Eigen::MatrixXd delta = d_out;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const Eigen::MatrixXd& input = tape.activations[l];
    grad.weights_[l].noalias() += delta * input.transpose();
    grad.biases_[l] += delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = weights_[l].transpose() * delta;
    delta = back.array() * (1.0 - input.array().square());
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

void Mlp::flatten_into(Eigen::VectorXd& out, Eigen::Index offset) const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.segment(offset, weights_[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(weights_[l].data(), weights_[l].size());
    offset += weights_[l].size();
    out.segment(offset, biases_[l].size()) = biases_[l];
    offset += biases_[l].size();
  }
}

void Mlp::assign_from(const Eigen::VectorXd& in, Eigen::Index offset) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::Map<Eigen::VectorXd>(weights_[l].data(), weights_[l].size()) =
        in.segment(offset, weights_[l].size());
    offset += weights_[l].size();
    biases_[l] = in.segment(offset, biases_[l].size());
    offset += biases_[l].size();
  }
}

void Mlp::set_zero() {
  for (auto& w : weights_) w.setZero();
  for (auto& b : biases_) b.setZero();
}

bool Mlp::finite() const {
  for (const auto& w : weights_) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases_) {
    if (!b.allFinite()) return false;
  }
  return true;
}

}  // namespace slung
