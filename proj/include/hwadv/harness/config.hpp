#pragma once

#include <cstdint>
#include <string>

#include "hwadv/av/reward.hpp"
#include "hwadv/rl/learner.hpp"
#include "hwadv/sim/types.hpp"

namespace hwadv::harness {

/// Network/replay settings shared by both trained agents.
struct RlSharedKeys {
  double gamma = 0.9;
  int hidden1 = 64;
  int hidden2 = 64;
  int batch_size = 32;
  int target_sync = 1000;
  std::uint64_t buffer_normal = 100000;
  std::uint64_t buffer_crash = 10000;
  double mix_fraction = 0.25;
  int steps_per_episode = 200;
};

struct AgentTrainKeys {
  double learning_rate = 1e-6;
  long episodes = 10000;
  double epsilon0 = 0.2;
  double epsilon_min = 0.01;
  double anneal_c = 2e-6;
};

/// Whole-experiment configuration, loadable from a flat `key = value` text
/// file. Unknown keys are rejected; every key has a documented default.
struct ExperimentConfig {
  sim::SimConfig sim;
  av::RewardParams reward;
  RlSharedKeys rl;
  AgentTrainKeys av_train{3e-4, 10000};
  AgentTrainKeys attacker_train{}; // literal training-table values

  int n_env_cars = 10;
  bool with_attacker = false;
  long n_eval_episodes = 10000;
  int workers = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  bool write_all_traces = false;

  static ExperimentConfig from_file(const std::string& path);

  /// Parses one `key = value` assignment. Throws on unknown keys or
  /// malformed values.
  void apply(const std::string& key, const std::string& value);

  /// Canonical full listing, one `key = value` per line, doubles at full
  /// 64-bit precision.
  std::string canonical_text() const;

  /// 16-hex-digit digest over the physics/reward/training keys. Run-shape
  /// keys (car count, attacker presence, evaluation size, workers, output
  /// paths) are excluded so the histograms of one experiment family share a
  /// hash.
  std::string config_hash() const;

  void save(const std::string& path) const;

  /// Enforces structural invariants (3 lanes, lane wider than a vehicle,
  /// valid speed band, gamma in [0,1), mix fraction in [0,1], ...).
  void validate() const;

  rl::TrainConfig av_train_config() const;
  rl::TrainConfig attacker_train_config(int repeat = 0) const;
};

} // namespace hwadv::harness
