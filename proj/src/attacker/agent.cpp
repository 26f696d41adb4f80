#include "hwadv/attacker/agent.hpp"

#include <cmath>
#include <stdexcept>

#include "hwadv/av/reward.hpp"
#include "hwadv/sim/hash_rng.hpp"

namespace hwadv::attacker {

using sim::ActionMap;
using sim::DiscreteAction;
using sim::Role;
using sim::WorldState;

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::av_crashed: return "av_crashed";
    case Termination::attacker_crashed: return "attacker_crashed";
    case Termination::av_left_neighborhood: return "av_left_neighborhood";
    case Termination::timeout: return "timeout";
  }
  return "unknown";
}

LookaheadResult lookahead_reward(const WorldState& world, const ActionMap& actions,
                                 const av::FrozenPolicy& av_policy,
                                 const AttackerGreedy* attacker_for_mee) {
  LookaheadResult res;
  auto stepped = sim::step(world, actions);
  res.next_world = std::move(stepped.first);
  res.events = std::move(stepped.second);
  const WorldState& next = res.next_world;

  const sim::VehicleState* av = world.find_role(Role::av);
  const sim::VehicleState* attacker = world.find_role(Role::attacker);
  const int av_id = av ? av->id : sim::kNoVehicle;
  const int attacker_id = attacker ? attacker->id : sim::kNoVehicle;

  int av_partner = sim::kNoVehicle;
  bool attacker_hit = false;
  for (const auto& e : res.events) {
    if (e.vehicle_a == av_id || e.vehicle_b == av_id) {
      const int other = e.vehicle_a == av_id ? e.vehicle_b : e.vehicle_a;
      if (av_partner == sim::kNoVehicle || other < av_partner) av_partner = other;
    }
    if (e.vehicle_a == attacker_id || e.vehicle_b == attacker_id) attacker_hit = true;
  }

  if (av_partner != sim::kNoVehicle) {
    // Responsibility is adjudicated on the simulated crash; the responsible
    // car's next action is what its policy picks in the crash state.
    const judge::NextActionFn next_action = [&](int id) -> DiscreteAction {
      const sim::VehicleState* v = next.find(id);
      if (v && v->role == Role::av) return av_policy.act(next);
      if (v && v->role == Role::attacker && attacker_for_mee)
        return attacker_for_mee->act(next, av_policy.act(next));
      return sim::env_policy(next, id);
    };
    res.verdict = judge::judge(world, next, av_id, av_partner, av_id, next_action);
    res.crash_partner = av_partner;
    res.terminate = true;
    if (av_partner == attacker_id && res.verdict->responsible == attacker_id) {
      // The attacker caused the crash itself: flat -1, but the verdict is
      // still recorded so the crash lands in the failure-code tables.
      res.reward = -1.0 - kTimeCost;
      res.cause = Termination::attacker_crashed;
    } else {
      res.reward = res.verdict->attacker_reward - kTimeCost;
      res.cause = Termination::av_crashed;
    }
    return res;
  }

  if (attacker_id != sim::kNoVehicle) {
    if (attacker_hit) {
      res.reward = -1.0 - kTimeCost;
      res.terminate = true;
      res.cause = Termination::attacker_crashed;
      return res;
    }
    if (sim::neighbor_slot_of(sim::nearest_neighbors(next, attacker_id), av_id) ==
        sim::kNoVehicle) {
      res.reward = -1.0 - kTimeCost;
      res.terminate = true;
      res.cause = Termination::av_left_neighborhood;
      return res;
    }
  }
  res.reward = -kTimeCost;
  return res;
}

AttackerEpisodeOutcome run_episode(WorldState world, const av::FrozenPolicy& av_policy,
                                   const AttackerGreedy* attacker_policy, int max_steps,
                                   const av::RewardParams& reward_params,
                                   const StepRecorder& recorder) {
  AttackerEpisodeOutcome outcome;
  const sim::VehicleState* av = world.find_role(Role::av);
  if (!av) throw std::invalid_argument("run_episode: world has no AV");
  const int av_id = av->id;

  for (int t = 0; t < max_steps; ++t) {
    const DiscreteAction av_act = av_policy.act(world);
    ActionMap actions;
    actions[av_id] = av_act;
    for (const auto& v : world.vehicles) {
      if (v.role == Role::env) {
        actions[v.id] = sim::env_policy(world, v.id);
      } else if (v.role == Role::attacker) {
        actions[v.id] = attacker_policy ? attacker_policy->act(world, av_act)
                                        : sim::env_policy(world, v.id);
      }
    }

    LookaheadResult look = lookahead_reward(world, actions, av_policy, attacker_policy);
    outcome.cumulative_reward += look.reward;
    outcome.steps = t + 1;

    if (recorder) {
      bool av_collided = false;
      for (const auto& e : look.events)
        av_collided |= e.vehicle_a == av_id || e.vehicle_b == av_id;
      const double av_r = av::reward_av(world, look.next_world, av_collided, reward_params);
      recorder(StepRecord{t, actions, look.next_world, av_r, look.reward});
    }

    if (look.terminate) {
      outcome.termination = look.cause;
      outcome.verdict = look.verdict;
      outcome.crash_partner = look.crash_partner;
      return outcome;
    }
    world = std::move(look.next_world);
  }
  outcome.termination = Termination::timeout;
  return outcome;
}

AttackerTrainResult train_attacker(const AttackerTrainSetup& setup,
                                   const av::FrozenPolicy& frozen_av) {
  const rl::TrainConfig& cfg = setup.train;
  std::vector<int> dims;
  dims.push_back(kAttackerObservationDim);
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(rl::QNetwork::kActionCount);

  rl::Learner learner(dims, cfg);
  rl::DualReplay replay(cfg.buffer_normal, cfg.buffer_crash, cfg.mix_fraction);
  const rl::ObservationScaling scaling = av::scaling_from_road(setup.sim.road);
  const AttackerGreedy greedy_self(&learner.online(), scaling);

  AttackerTrainResult result;

  for (long ep = 0; ep < cfg.episodes; ++ep) {
    WorldState world = sim::init_world(setup.sim, sim::episode_seed(cfg.seed, ep),
                                       setup.n_env_cars, /*with_attacker=*/true);
    const int av_id = world.find_role(Role::av)->id;
    const int attacker_id = world.find_role(Role::attacker)->id;

    DiscreteAction av_act = frozen_av.act(world);
    Eigen::VectorXd obs = observe_attacker(world, av_act, scaling);
    std::vector<rl::Transition> episode;
    episode.reserve(cfg.steps_per_episode);
    bool at_fault = false;

    for (int t = 0; t < cfg.steps_per_episode; ++t) {
      const int a_idx = learner.act(obs);

      ActionMap actions;
      actions[av_id] = av_act;
      actions[attacker_id] = DiscreteAction::from_index(a_idx);
      for (const auto& v : world.vehicles)
        if (v.role == Role::env) actions[v.id] = sim::env_policy(world, v.id);

      LookaheadResult look = lookahead_reward(world, actions, frozen_av, &greedy_self);

      const DiscreteAction av_act_next = frozen_av.act(look.next_world);
      const Eigen::VectorXd obs_next =
          observe_attacker(look.next_world, av_act_next, scaling);
      episode.push_back({obs, a_idx, look.reward, obs_next, look.terminate});

      if (const auto loss = learner.train_step(replay)) {
        if (!std::isfinite(*loss))
          throw std::runtime_error("train_attacker: training diverged (non-finite loss)");
      }

      if (look.terminate) {
        at_fault = look.verdict && look.verdict->failure_code >= 2 &&
                   look.verdict->failure_code <= 7;
        break;
      }
      world = std::move(look.next_world);
      av_act = av_act_next;
      obs = obs_next;
    }
    replay.route_episode(std::move(episode), at_fault);

    if (setup.eval_period > 0 && (ep + 1) % setup.eval_period == 0) {
      double sum = 0.0, sum_sq = 0.0;
      for (int i = 0; i < setup.eval_rollouts; ++i) {
        WorldState eval_world =
            sim::init_world(setup.sim, sim::hash_u64(cfg.seed, 0x65766cULL, ep, i),
                            setup.n_env_cars, true);
        const double r = run_episode(std::move(eval_world), frozen_av, &greedy_self,
                                     cfg.steps_per_episode, {})
                             .cumulative_reward;
        sum += r;
        sum_sq += r * r;
      }
      const double n = setup.eval_rollouts;
      const double mean = sum / n;
      const double var = std::max(0.0, sum_sq / n - mean * mean);
      result.curve.push_back({ep + 1, mean, std::sqrt(var)});
    }
  }

  if (!learner.online().finite())
    throw std::runtime_error("train_attacker: training diverged (non-finite parameters)");
  result.checkpoint = rl::make_checkpoint("attacker", learner.online(), scaling, cfg);
  return result;
}

} // namespace hwadv::attacker
