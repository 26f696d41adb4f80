#include "hwadv/rl/learner.hpp"

#include <algorithm>
#include <cmath>

#include "hwadv/sim/hash_rng.hpp"

namespace hwadv::rl {

double ddqn_target(const QNetwork& online, const QNetwork& target, const Transition& tr,
                   double gamma) {
  if (tr.terminal) return tr.r;
  Eigen::Index best = 0;
  online.forward(tr.s_next).maxCoeff(&best);
  return tr.r + gamma * target.forward(tr.s_next)(best);
}

int epsilon_greedy(const QNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& s,
                   double epsilon, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (u01(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, QNetwork::kActionCount - 1);
    return pick(rng);
  }
  return net.argmax(s);
}

Learner::Learner(std::vector<int> layer_dims, TrainConfig cfg)
    : cfg_(std::move(cfg)),
      online_(std::move(layer_dims), sim::hash_u64(cfg_.seed, 0x6e6574ULL)),
      target_(online_),
      rng_(sim::hash_u64(cfg_.seed, 0x726e67ULL)) {}

double Learner::epsilon() const {
  return std::max(cfg_.epsilon_min,
                  cfg_.epsilon0 - cfg_.anneal_c * static_cast<double>(act_count_));
}

int Learner::act(const Eigen::Ref<const Eigen::VectorXd>& s) {
  const double eps = epsilon();
  ++act_count_;
  return epsilon_greedy(online_, s, eps, rng_);
}

std::optional<double> Learner::train_step(DualReplay& replay) {
  const int B = cfg_.batch_size;
  if (replay.normal.size() < static_cast<std::size_t>(B)) return std::nullopt;

  const int in_dim = online_.input_dim();
  if (batch_s_.cols() != B) {
    batch_s_.resize(in_dim, B);
    batch_next_.resize(in_dim, B);
    batch_a_.resize(B);
    batch_r_.resize(B);
    batch_target_.resize(B);
    batch_terminal_.resize(B);
  }

  const int n_crash = replay.at_fault_crash.empty()
                          ? 0
                          : static_cast<int>(std::lround(replay.mix_fraction * B));
  for (int i = 0; i < B; ++i) {
    const Transition& t =
        i < n_crash ? replay.at_fault_crash.sample(rng_) : replay.normal.sample(rng_);
    batch_s_.col(i) = t.s;
    batch_next_.col(i) = t.s_next;
    batch_a_[i] = t.a;
    batch_r_(i) = t.r;
    batch_terminal_[i] = t.terminal;
  }

  // Double-DQN targets: online argmax over s', target net evaluates.
  const Eigen::MatrixXd q_next_online = online_.forward_batch(batch_next_);
  const Eigen::MatrixXd q_next_target = target_.forward_batch(batch_next_);
  for (int i = 0; i < B; ++i) {
    if (batch_terminal_[i]) {
      batch_target_(i) = batch_r_(i);
    } else {
      Eigen::Index best = 0;
      q_next_online.col(i).maxCoeff(&best);
      batch_target_(i) = batch_r_(i) + cfg_.gamma * q_next_target(best, i);
    }
  }

  // Forward with cached activations, then one batched backward pass.
  const int layers = online_.layer_count();
  std::vector<Eigen::MatrixXd> acts(layers + 1);
  std::vector<Eigen::MatrixXd> pre(layers);
  acts[0] = batch_s_;
  for (int l = 0; l < layers; ++l) {
    pre[l] = (online_.weights()[l] * acts[l]).colwise() + online_.biases()[l];
    acts[l + 1] = l + 1 < layers ? pre[l].cwiseMax(0.0).eval() : pre[l];
  }

  double loss = 0.0;
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(online_.output_dim(), B);
  for (int i = 0; i < B; ++i) {
    const double diff = acts[layers](batch_a_[i], i) - batch_target_(i);
    loss += 0.5 * diff * diff;
    delta(batch_a_[i], i) = diff / B;
  }
  loss /= B;

  const double lr = cfg_.learning_rate;
  for (int l = layers - 1; l >= 0; --l) {
    Eigen::MatrixXd delta_prev;
    if (l > 0) {
      delta_prev = (online_.weights()[l].transpose() * delta)
                       .cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    online_.weights()[l].noalias() -= lr * (delta * acts[l].transpose());
    online_.biases()[l] -= lr * delta.rowwise().sum();
    if (l > 0) delta = std::move(delta_prev);
  }

  ++train_count_;
  if (cfg_.target_sync > 0 && train_count_ % cfg_.target_sync == 0) sync_target();
  return loss;
}

} // namespace hwadv::rl
