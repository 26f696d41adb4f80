#include "hwadv/rl/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hwadv::rl {

QNetwork::QNetwork(std::vector<int> layer_dims, std::uint64_t seed)
    : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw std::invalid_argument("QNetwork needs >= 2 layer dims");
  if (dims_.back() != kActionCount)
    throw std::invalid_argument("QNetwork output dimension must be 12");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int layers = static_cast<int>(dims_.size()) - 1;
  weights_.reserve(layers);
  biases_.reserve(layers);
  for (int l = 0; l < layers; ++l) {
    const int fan_in = dims_[l];
    const int fan_out = dims_[l + 1];
    const bool head = l == layers - 1;
    const double std_dev = head ? 1e-3 : std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd W(fan_out, fan_in);
    for (int c = 0; c < fan_in; ++c)
      for (int r = 0; r < fan_out; ++r) W(r, c) = std_dev * normal(rng);
    weights_.push_back(std::move(W));
    biases_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
}

Eigen::VectorXd QNetwork::forward(const Eigen::Ref<const Eigen::VectorXd>& s) const {
  if (s.size() != input_dim())
    throw std::invalid_argument("QNetwork::forward: input dimension mismatch");
  Eigen::VectorXd h = s;
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    Eigen::VectorXd z = weights_[l] * h + biases_[l];
    h = l + 1 < layers ? z.cwiseMax(0.0).eval() : std::move(z);
  }
  return h;
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  if (X.rows() != input_dim())
    throw std::invalid_argument("QNetwork::forward_batch: input dimension mismatch");
  Eigen::MatrixXd h = X;
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (weights_[l] * h).colwise() + biases_[l];
    h = l + 1 < layers ? z.cwiseMax(0.0).eval() : std::move(z);
  }
  return h;
}

int QNetwork::argmax(const Eigen::Ref<const Eigen::VectorXd>& s) const {
  Eigen::Index best = 0;
  forward(s).maxCoeff(&best); // first occurrence == lowest index
  return static_cast<int>(best);
}

bool QNetwork::finite() const {
  for (const auto& W : weights_)
    if (!W.allFinite()) return false;
  for (const auto& b : biases_)
    if (!b.allFinite()) return false;
  return true;
}

double td_loss(const QNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& s, int a,
               double td_target) {
  const double diff = net.forward(s)(a) - td_target;
  return 0.5 * diff * diff;
}

Gradients backward(const QNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& s,
                   int a, double td_target) {
  const int layers = net.layer_count();
  std::vector<Eigen::VectorXd> acts; // acts[l] feeds layer l
  std::vector<Eigen::VectorXd> pre;  // pre[l] = W_l acts[l] + b_l
  acts.reserve(layers + 1);
  pre.reserve(layers);
  acts.emplace_back(s);
  for (int l = 0; l < layers; ++l) {
    pre.push_back(net.weights()[l] * acts[l] + net.biases()[l]);
    acts.push_back(l + 1 < layers ? pre[l].cwiseMax(0.0).eval() : pre[l]);
  }

  Gradients g;
  g.dW.resize(layers);
  g.db.resize(layers);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(net.output_dim());
  delta(a) = acts.back()(a) - td_target;
  for (int l = layers - 1; l >= 0; --l) {
    g.dW[l] = delta * acts[l].transpose();
    g.db[l] = delta;
    if (l > 0) {
      delta = (net.weights()[l].transpose() * delta).cwiseProduct(
          (pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

} // namespace hwadv::rl
