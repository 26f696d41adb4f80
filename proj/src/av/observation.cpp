#include "hwadv/av/observation.hpp"

#include <algorithm>
#include <stdexcept>

namespace hwadv::av {

rl::ObservationScaling scaling_from_road(const sim::RoadConfig& road) {
  rl::ObservationScaling s;
  s.y_center = (road.lane_count - 1) * road.lane_width / 2.0;
  s.y_half = road.lane_count * road.lane_width / 2.0;
  s.v_half = road.speed_max / 2.0;
  s.dx_range = road.road_length / 2.0;
  s.dy_range = (road.lane_count - 1) * road.lane_width;
  s.dv_range = road.speed_max;
  return s;
}

void encode_neighbor_slots(const sim::WorldState& world, const sim::VehicleState& ego,
                           const std::array<int, sim::kNeighborSlots>& slots,
                           const rl::ObservationScaling& scaling,
                           Eigen::Ref<Eigen::VectorXd> out) {
  for (int i = 0; i < sim::kNeighborSlots; ++i) {
    const bool front = i % 2 == 0;
    double dx, dy, dv;
    if (slots[i] == sim::kNoVehicle) {
      dx = front ? 1.0 : -1.0; // saturated sentinel at max range
      dy = 0.0;
      dv = 0.0;
    } else {
      const sim::VehicleState& v = *world.find(slots[i]);
      dx = std::clamp((v.x - ego.x) / scaling.dx_range, -1.0, 1.0);
      dy = std::clamp((v.y - ego.y) / scaling.dy_range, -1.0, 1.0);
      dv = std::clamp((v.vx - ego.vx) / scaling.dv_range, -1.0, 1.0);
    }
    out(3 * i + 0) = dx;
    out(3 * i + 1) = dy;
    out(3 * i + 2) = dv;
  }
}

Eigen::VectorXd observe_av(const sim::WorldState& world,
                           const rl::ObservationScaling& scaling) {
  const sim::VehicleState* av = world.find_role(sim::Role::av);
  if (!av) throw std::invalid_argument("observe_av: world has no AV");

  Eigen::VectorXd obs(kAvObservationDim);
  obs(0) = scaling.scale_y(av->y);
  obs(1) = scaling.scale_v(av->vx);
  encode_neighbor_slots(world, *av, sim::nearest_neighbors(world, av->id), scaling,
                        obs.segment(2, 18));
  return obs;
}

} // namespace hwadv::av
