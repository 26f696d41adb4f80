#include "hwadv/attacker/observation.hpp"

#include <stdexcept>

#include "hwadv/av/observation.hpp"

namespace hwadv::attacker {

Eigen::VectorXd observe_attacker(const sim::WorldState& world,
                                 sim::DiscreteAction av_action,
                                 const rl::ObservationScaling& scaling) {
  const sim::VehicleState* attacker = world.find_role(sim::Role::attacker);
  if (!attacker) throw std::invalid_argument("observe_attacker: world has no attacker");
  const sim::VehicleState* av = world.find_role(sim::Role::av);

  Eigen::VectorXd obs(kAttackerObservationDim);
  obs(0) = scaling.scale_y(attacker->y);
  obs(1) = scaling.scale_v(attacker->vx);

  const auto slots = sim::nearest_neighbors(world, attacker->id);
  av::encode_neighbor_slots(world, *attacker, slots, scaling, obs.segment(2, 18));

  // The AV's emitted action this step, and where the AV sits in the
  // attacker's slot layout.
  obs(20) = (2.0 * static_cast<int>(av_action.ax) - 3.0) / 3.0;
  obs(21) = static_cast<int>(av_action.ay) - 1.0;
  const int av_slot = av ? sim::neighbor_slot_of(slots, av->id) : sim::kNoVehicle;
  obs(22) = av_slot == sim::kNoVehicle ? 0.0 : (2.0 * av_slot - 5.0) / 5.0;
  obs(23) = av_slot == sim::kNoVehicle ? 0.0 : 1.0;
  return obs;
}

} // namespace hwadv::attacker
