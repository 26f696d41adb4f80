#pragma once

#include <Eigen/Dense>

#include "hwadv/rl/checkpoint.hpp"
#include "hwadv/sim/world.hpp"

namespace hwadv::attacker {

inline constexpr int kAttackerObservationDim = 24;

/// 24-vector: [own y, own vx, 6 neighbor slots x (dx, dy, dv), AV ax index,
/// AV ay index, AV neighbor-slot index, AV-in-range flag], all scaled.
/// `av_action` is the action the AV chose this step; the builder reads only
/// public world state and that emitted action.
Eigen::VectorXd observe_attacker(const sim::WorldState& world,
                                 sim::DiscreteAction av_action,
                                 const rl::ObservationScaling& scaling);

} // namespace hwadv::attacker
