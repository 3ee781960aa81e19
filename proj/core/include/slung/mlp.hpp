#pragma once

#include "slung/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace slung {

// Fully connected network with tanh hidden layers and a linear output layer.
// Batched calls take one sample per column.
class Mlp {
 public:
  Mlp() = default;
  // Layer widths from input to output; parameters start at zero.
  explicit Mlp(std::vector<int> sizes);

  // Scaled-normal init (std 1/sqrt(fan_in)); the output layer is further
  // multiplied by `output_gain`. Biases start at zero.
  void init(Rng& rng, double output_gain);

  struct Tape {
    // activations[0] is the input, then each hidden layer after tanh.
    std::vector<Eigen::MatrixXd> activations;
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape& tape) const;
  // Accumulates parameter gradients into `grad` (same shape) for the
  // upstream gradient `d_out` with respect to the linear output.
  void backward(const Tape& tape, const Eigen::MatrixXd& d_out, Mlp& grad) const;

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t layer_count() const { return weights_.size(); }

  Eigen::MatrixXd& weight(std::size_t i) { return weights_[i]; }
  const Eigen::MatrixXd& weight(std::size_t i) const { return weights_[i]; }
  Eigen::VectorXd& bias(std::size_t i) { return biases_[i]; }
  const Eigen::VectorXd& bias(std::size_t i) const { return biases_[i]; }

  std::size_t parameter_count() const;
  // Weights (column-major) then bias, layer by layer.
  void flatten_into(Eigen::VectorXd& out, Eigen::Index offset) const;
  void assign_from(const Eigen::VectorXd& in, Eigen::Index offset);
  void set_zero();
  bool finite() const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

}  // namespace slung
