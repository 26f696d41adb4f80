#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hwadv/harness/config.hpp"
#include "hwadv/judge/verdict.hpp"
#include "hwadv/sim/types.hpp"

namespace hwadv::harness {

struct TraceStep {
  sim::ActionMap actions;                       // executed actions, all vehicles
  std::vector<sim::VehicleState> states_after;  // world after the step
  double av_reward = 0.0;
  double attacker_reward = 0.0;
};

/// Line-delimited structured text record of one episode: header, initial
/// states, one block per step, termination footer. Doubles are written with
/// 17 significant digits so the file replays bitwise.
struct EpisodeTrace {
  std::string config_hash;
  std::uint64_t episode_seed = 0;
  long episode_id = 0;
  int n_env_cars = 0;
  bool with_attacker = false;
  bool safety_enabled = true;
  std::vector<sim::VehicleState> initial;
  std::vector<TraceStep> steps;
  std::string termination = "timeout";
  std::optional<judge::Verdict> verdict;
  double cumulative_attacker_reward = 0.0;

  void write(const std::string& path) const;
  static EpisodeTrace read(const std::string& path);
};

/// Re-runs init_world(seed) + step over the recorded action stream and
/// demands bitwise equality with every recorded state. On mismatch `why`
/// (when given) names the first divergent step.
bool replay_matches(const ExperimentConfig& config, const EpisodeTrace& trace,
                    std::string* why = nullptr);

} // namespace hwadv::harness
