#include "hwadv/av/agent.hpp"

#include <cmath>
#include <stdexcept>

#include "hwadv/judge/verdict.hpp"
#include "hwadv/sim/hash_rng.hpp"

namespace hwadv::av {

using sim::DiscreteAction;
using sim::Role;
using sim::WorldState;

FrozenPolicy::FrozenPolicy(const rl::Checkpoint& ckpt)
    : net_(rl::network_from(ckpt)), scaling_(ckpt.scaling) {
  if (net_.input_dim() != kAvObservationDim)
    throw std::runtime_error("FrozenPolicy: checkpoint is not an AV policy");
}

DiscreteAction FrozenPolicy::greedy(const WorldState& world) const {
  return DiscreteAction::from_index(net_.argmax(observe_av(world, scaling_)));
}

DiscreteAction FrozenPolicy::act(const WorldState& world) const {
  return sim::safety_check(world, greedy(world));
}

AvTrainResult train_av(const AvTrainSetup& setup) {
  const rl::TrainConfig& cfg = setup.train;
  std::vector<int> dims;
  dims.push_back(kAvObservationDim);
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(rl::QNetwork::kActionCount);

  rl::Learner learner(dims, cfg);
  rl::DualReplay replay(cfg.buffer_normal, cfg.buffer_crash, cfg.mix_fraction);
  const rl::ObservationScaling scaling = scaling_from_road(setup.sim.road);

  AvTrainResult result;
  result.log.reserve(cfg.episodes);

  for (long ep = 0; ep < cfg.episodes; ++ep) {
    WorldState world =
        sim::init_world(setup.sim, sim::episode_seed(cfg.seed, ep), setup.n_env_cars,
                        /*with_attacker=*/false);
    const int av_id = world.find_role(Role::av)->id;

    Eigen::VectorXd obs = observe_av(world, scaling);
    std::vector<rl::Transition> episode;
    episode.reserve(cfg.steps_per_episode);

    AvEpisodeLog row;
    row.episode = ep;
    double loss_sum = 0.0;
    int loss_count = 0;

    for (int t = 0; t < cfg.steps_per_episode; ++t) {
      const int proposed_idx = learner.act(obs);
      const DiscreteAction executed =
          sim::safety_check(world, DiscreteAction::from_index(proposed_idx));

      sim::ActionMap actions;
      actions[av_id] = executed;
      for (const auto& v : world.vehicles)
        if (v.role == Role::env) actions[v.id] = sim::env_policy(world, v.id);

      auto [next, events] = sim::step(world, actions);

      int partner = sim::kNoVehicle;
      for (const auto& e : events) {
        if (e.vehicle_a == av_id || e.vehicle_b == av_id) {
          const int other = e.vehicle_a == av_id ? e.vehicle_b : e.vehicle_a;
          if (partner == sim::kNoVehicle || other < partner) partner = other;
        }
      }
      const bool collided = partner != sim::kNoVehicle;

      const double r = reward_av(world, next, collided, setup.reward);
      const Eigen::VectorXd obs_next = observe_av(next, scaling);
      episode.push_back({obs, executed.index(), r, obs_next, collided});

      if (const auto loss = learner.train_step(replay)) {
        if (!std::isfinite(*loss))
          throw std::runtime_error("train_av: training diverged (non-finite loss)");
        loss_sum += *loss;
        ++loss_count;
      }

      row.episode_return += r;
      row.steps = t + 1;

      if (collided) {
        // The crash verdict keys the replay routing; the responsible car's
        // next action comes from the deployed pipelines on the crash state.
        const judge::NextActionFn next_action = [&](int id) {
          const sim::VehicleState* v = next.find(id);
          if (v && v->role == Role::av) {
            const Eigen::VectorXd o = observe_av(next, scaling);
            return sim::safety_check(
                next, DiscreteAction::from_index(learner.act_greedy(o)));
          }
          return sim::env_policy(next, id);
        };
        row.crashed = true;
        row.failure_code =
            judge::judge(world, next, av_id, partner, av_id, next_action).failure_code;
        break;
      }
      world = std::move(next);
      obs = obs_next;
    }

    row.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    row.epsilon = learner.epsilon();
    result.log.push_back(row);

    const bool at_fault = row.failure_code >= 2 && row.failure_code <= 7;
    replay.route_episode(std::move(episode), at_fault);
  }

  if (!learner.online().finite())
    throw std::runtime_error("train_av: training diverged (non-finite parameters)");
  result.checkpoint = rl::make_checkpoint("av", learner.online(), scaling, cfg);
  return result;
}

} // namespace hwadv::av
