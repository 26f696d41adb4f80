#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace hwadv::rl {

/// Small dense multilayer perceptron: rectified hidden layers, linear head.
/// Always maps to the 12 discrete actions; trained by analytic
/// backpropagation of the selected-action squared TD error.
class QNetwork {
 public:
  static constexpr int kActionCount = 12;

  QNetwork() = default;

  /// He-normal hidden initialization, near-zero head so untrained Q ~ 0.
  QNetwork(std::vector<int> layer_dims, std::uint64_t seed);

  const std::vector<int>& layer_dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int layer_count() const { return static_cast<int>(weights_.size()); }

  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& s) const;

  /// Columns are samples: X is input_dim x batch, result output_dim x batch.
  Eigen::MatrixXd forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

  /// Greedy action, ties broken by the lowest index.
  int argmax(const Eigen::Ref<const Eigen::VectorXd>& s) const;

  bool finite() const;

 private:
  std::vector<int> dims_;
  std::vector<Eigen::MatrixXd> weights_; // weights_[l]: dims_[l+1] x dims_[l]
  std::vector<Eigen::VectorXd> biases_;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
};

/// Loss 0.5 * (Q(s,a) - td_target)^2 of one transition.
double td_loss(const QNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& s, int a,
               double td_target);

/// Analytic gradient of td_loss w.r.t. every weight and bias; only the
/// selected action's output row carries direct error signal.
Gradients backward(const QNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& s,
                   int a, double td_target);

} // namespace hwadv::rl
