#pragma once

#include <array>

#include <Eigen/Dense>

#include "hwadv/rl/checkpoint.hpp"
#include "hwadv/sim/world.hpp"

namespace hwadv::av {

inline constexpr int kAvObservationDim = 20;

/// Scaling constants derived from the road geometry; bijective on the
/// physical ranges.
rl::ObservationScaling scaling_from_road(const sim::RoadConfig& road);

/// Writes the 6 canonical neighbor slots as (dx, dy, dv) triples relative to
/// `ego` into out[0..17]. Empty slots saturate: max-range dx toward the
/// slot's side, zero dy and dv.
void encode_neighbor_slots(const sim::WorldState& world, const sim::VehicleState& ego,
                           const std::array<int, sim::kNeighborSlots>& slots,
                           const rl::ObservationScaling& scaling,
                           Eigen::Ref<Eigen::VectorXd> out);

/// 20-vector [y, vx, 6 x (dx, dy, dv)] in canonical slot order, scaled.
Eigen::VectorXd observe_av(const sim::WorldState& world,
                           const rl::ObservationScaling& scaling);

} // namespace hwadv::av
