#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hwadv/rl/network.hpp"
#include "hwadv/rl/replay.hpp"

namespace hwadv::rl {

struct TrainConfig {
  double gamma = 0.9;
  double learning_rate = 1e-6;
  double epsilon0 = 0.2;
  double epsilon_min = 0.01;
  double anneal_c = 2e-6;          // per-global-step linear decay
  int steps_per_episode = 200;
  long episodes = 100000;
  int batch_size = 32;
  int target_sync = 1000;          // train steps between hard target copies
  std::size_t buffer_normal = 100000;
  std::size_t buffer_crash = 10000;
  double mix_fraction = 0.25;
  std::vector<int> hidden = {64, 64};
  std::uint64_t seed = 1;
};

/// Double-DQN bootstrap target: the online net selects, the target net
/// evaluates. Argmax ties break toward the lowest action index.
double ddqn_target(const QNetwork& online, const QNetwork& target, const Transition& tr,
                   double gamma);

/// epsilon-greedy over the 12 actions; exploration draws come from `rng`.
int epsilon_greedy(const QNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& s,
                   double epsilon, std::mt19937_64& rng);

/// Online/target network pair with plain-SGD minibatch updates from a
/// DualReplay, linear epsilon annealing and periodic hard target syncs.
class Learner {
 public:
  Learner(std::vector<int> layer_dims, TrainConfig cfg);

  /// Annealed epsilon at global action step k: max(eps_min, eps0 - c * k).
  double epsilon() const;

  /// epsilon-greedy action at the current annealed epsilon; advances the
  /// global step counter.
  int act(const Eigen::Ref<const Eigen::VectorXd>& s);

  int act_greedy(const Eigen::Ref<const Eigen::VectorXd>& s) const {
    return online_.argmax(s);
  }

  /// One minibatch SGD step; std::nullopt while the normal buffer holds
  /// fewer than batch_size transitions. Returns the mean selected-action
  /// squared-error loss.
  std::optional<double> train_step(DualReplay& replay);

  void sync_target() { target_ = online_; }

  const QNetwork& online() const { return online_; }
  const QNetwork& target() const { return target_; }
  QNetwork& online() { return online_; }
  const TrainConfig& config() const { return cfg_; }
  long long global_step() const { return act_count_; }
  long long train_count() const { return train_count_; }

 private:
  TrainConfig cfg_;
  QNetwork online_;
  QNetwork target_;
  std::mt19937_64 rng_;
  long long act_count_ = 0;
  long long train_count_ = 0;

  // batch workspaces, reused across train steps
  Eigen::MatrixXd batch_s_, batch_next_;
  std::vector<int> batch_a_;
  Eigen::VectorXd batch_r_, batch_target_;
  std::vector<bool> batch_terminal_;
};

} // namespace hwadv::rl
