#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hwadv/attacker/observation.hpp"
#include "hwadv/av/agent.hpp"
#include "hwadv/judge/verdict.hpp"
#include "hwadv/rl/learner.hpp"
#include "hwadv/sim/world.hpp"

namespace hwadv::attacker {

/// Per-step time cost charged to the attacker.
inline constexpr double kTimeCost = 0.05;

enum class Termination : std::uint8_t {
  av_crashed = 0,
  attacker_crashed = 1,
  av_left_neighborhood = 2,
  timeout = 3,
};

const char* termination_name(Termination t);

struct AttackerEpisodeOutcome {
  Termination termination = Termination::timeout;
  // Present for every AV-involved crash: always under av_crashed, and under
  // attacker_crashed when the attacker drove into the AV itself.
  std::optional<judge::Verdict> verdict;
  int crash_partner = sim::kNoVehicle; // the AV's collision partner, if any
  int steps = 0;
  double cumulative_reward = 0.0;
};

/// Greedy attacker policy over a (frozen or in-training) network.
class AttackerGreedy {
 public:
  AttackerGreedy(const rl::QNetwork* net, rl::ObservationScaling scaling)
      : net_(net), scaling_(scaling) {}

  sim::DiscreteAction act(const sim::WorldState& world,
                          sim::DiscreteAction av_action) const {
    return sim::DiscreteAction::from_index(
        net_->argmax(observe_attacker(world, av_action, scaling_)));
  }

 private:
  const rl::QNetwork* net_;
  rl::ObservationScaling scaling_;
};

struct LookaheadResult {
  double reward = -kTimeCost;
  std::optional<judge::Verdict> verdict;
  bool terminate = false;
  Termination cause = Termination::timeout; // meaningful iff terminate
  int crash_partner = sim::kNoVehicle;      // the AV's collision partner, if any
  sim::WorldState next_world;               // the simulated step, never the input
  std::vector<sim::CollisionEvent> events;
};

/// Simulates the joint actions one step ahead on a clone of `world` and
/// scores the outcome for the attacker: judged reward minus the time cost if
/// the AV crashes, -1 minus the time cost if the attacker crashes into a
/// non-AV car or the AV leaves its neighbor set, otherwise just the time
/// cost. The input world is never mutated. `attacker_for_mee` supplies the
/// attacker's own next action when a verdict needs it.
LookaheadResult lookahead_reward(const sim::WorldState& world,
                                 const sim::ActionMap& actions,
                                 const av::FrozenPolicy& av_policy,
                                 const AttackerGreedy* attacker_for_mee);

struct StepRecord {
  int step = 0;
  const sim::ActionMap& actions;
  const sim::WorldState& world_after;
  double av_reward = 0.0;
  double attacker_reward = 0.0;
};

using StepRecorder = std::function<void(const StepRecord&)>;

/// Rolls one episode: frozen AV, rule-based env cars and, when present, the
/// attacker (greedy policy if given, env rules otherwise). Stops at the
/// first termination cause or after `max_steps`.
AttackerEpisodeOutcome run_episode(sim::WorldState world, const av::FrozenPolicy& av_policy,
                                   const AttackerGreedy* attacker_policy, int max_steps,
                                   const av::RewardParams& reward_params,
                                   const StepRecorder& recorder = nullptr);

struct CurveRow {
  long episode = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
};

struct AttackerTrainSetup {
  sim::SimConfig sim;
  rl::TrainConfig train;
  int n_env_cars = 10;
  int eval_rollouts = 10;    // greedy rollouts per curve point
  int eval_period = 100;     // episodes between curve points
};

struct AttackerTrainResult {
  rl::Checkpoint checkpoint;
  std::vector<CurveRow> curve;
};

/// Double-DQN training of the attack policy against a frozen AV, with
/// dual-buffer routing keyed on AV-at-fault verdicts and periodic greedy
/// evaluation rollouts. Throws on NaN loss.
AttackerTrainResult train_attacker(const AttackerTrainSetup& setup,
                                   const av::FrozenPolicy& frozen_av);

} // namespace hwadv::attacker
