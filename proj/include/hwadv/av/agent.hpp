#pragma once

#include <optional>
#include <vector>

#include "hwadv/av/observation.hpp"
#include "hwadv/av/reward.hpp"
#include "hwadv/rl/checkpoint.hpp"
#include "hwadv/rl/learner.hpp"
#include "hwadv/sim/world.hpp"

namespace hwadv::av {

/// Immutable greedy policy loaded from a checkpoint. act() applies the
/// short-horizon safety filter when the world's config enables it; safe to
/// share across evaluation workers.
class FrozenPolicy {
 public:
  explicit FrozenPolicy(const rl::Checkpoint& ckpt);

  /// Greedy argmax (epsilon = 0), then the safety filter.
  sim::DiscreteAction act(const sim::WorldState& world) const;

  /// Raw greedy choice without the safety filter.
  sim::DiscreteAction greedy(const sim::WorldState& world) const;

  const rl::QNetwork& network() const { return net_; }
  const rl::ObservationScaling& scaling() const { return scaling_; }

 private:
  rl::QNetwork net_;
  rl::ObservationScaling scaling_;
};

struct AvTrainSetup {
  sim::SimConfig sim;
  RewardParams reward;
  rl::TrainConfig train;
  int n_env_cars = 10;
};

struct AvEpisodeLog {
  long episode = 0;
  int steps = 0;
  double episode_return = 0.0;
  bool crashed = false;
  int failure_code = -1; // -1: no crash
  double mean_loss = 0.0;
  double epsilon = 0.0;
};

struct AvTrainResult {
  rl::Checkpoint checkpoint;
  std::vector<AvEpisodeLog> log;
};

/// Double-DQN training of the lane-change policy in the attacker-free
/// environment, with the safety filter applied to executed actions. Crash
/// episodes where the AV is at fault route to the crash replay buffer.
/// Throws on NaN loss.
AvTrainResult train_av(const AvTrainSetup& setup);

} // namespace hwadv::av
