#include "hwadv/av/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hwadv/sim/world.hpp"

namespace hwadv::av {

double effective_dx_safe(const RewardParams& params, double vx) {
  return std::max(params.dx_safe_min, params.dx_safe_headway * vx);
}

double desired_lateral(const sim::RoadConfig& road, const sim::VehicleState& av) {
  const int lane = av.in_lane() ? av.from_lane : av.to_lane;
  return sim::lane_center(road, lane);
}

RewardTerms reward_terms(bool has_lead, double dx, double dx_safe, double y,
                         double y_des, double vx, const RewardParams& params) {
  RewardTerms t;
  if (has_lead && dx < dx_safe) {
    const double d = dx - dx_safe;
    t.r_x = std::exp(-(d * d) / (10.0 * dx_safe)) - 1.0;
  }
  const double ey = y - y_des;
  t.r_y = std::exp(-(ey * ey) / params.y_norm) - 1.0;
  const double ev = vx - params.v_des;
  t.r_v = std::exp(-(ev * ev) / params.v_norm) - 1.0;
  return t;
}

double reward_av(const sim::WorldState& world_before, const sim::WorldState& world_after,
                 bool collided, const RewardParams& params) {
  (void)world_before;
  if (collided) return -2.0;

  const sim::VehicleState* av = world_after.find_role(sim::Role::av);
  if (!av) throw std::invalid_argument("reward_av: world has no AV");
  const sim::RoadConfig& road = world_after.config.road;

  // Lead vehicle: nearest car ahead in the AV's current lane.
  const auto slots = sim::nearest_neighbors(world_after, av->id);
  const int lane = sim::lane_of(road, av->y);
  const int lead_id = slots[lane * 2];
  const bool has_lead = lead_id != sim::kNoVehicle;
  const double dx = has_lead ? world_after.find(lead_id)->x - av->x : 0.0;

  const RewardTerms t =
      reward_terms(has_lead, dx, effective_dx_safe(params, av->vx), av->y,
                   desired_lateral(road, *av), av->vx, params);
  return (t.r_x + t.r_y + t.r_v) / 3.0;
}

} // namespace hwadv::av
