#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "hwadv/sim/types.hpp"

namespace hwadv::sim {

inline constexpr int kNeighborSlots = 6;
inline constexpr int kNoVehicle = -1;

double lane_center(const RoadConfig& road, int lane);

/// Lane index whose center is nearest to y (clamped to the road).
int lane_of(const RoadConfig& road, double y);

/// True iff the vehicle's lateral span [y - w/2, y + w/2] touches an
/// interior lane boundary line (closed-interval contact).
bool on_marker(const VehicleState& v, const RoadConfig& road);

/// Current lateral position of a (possibly mid-change) vehicle; exact
/// linear interpolation between lane centers in integer sub-steps.
double lateral_position(const RoadConfig& road, const ActionParams& actions,
                        const VehicleState& v);

/// Axis-aligned rectangle overlap over all pairs; strict overlap, touching
/// edges do not collide. Events are ordered with vehicle_a < vehicle_b.
std::vector<CollisionEvent> detect_collisions(const WorldState& world);

/// For each (lane, side) slot the id of the nearest vehicle by |dx|, in
/// canonical order [lane0 front, lane0 behind, lane1 front, ...]. A vehicle
/// with x >= ego.x counts as front. Empty slots hold kNoVehicle.
std::array<int, kNeighborSlots> nearest_neighbors(const WorldState& world, int ego_id);

/// Slot index (0..5) occupied by `id`, or kNoVehicle.
int neighbor_slot_of(const std::array<int, kNeighborSlots>& slots, int id);

/// Rule-based policy for env cars: headway-threshold car following toward a
/// per-vehicle desired speed, with seeded stochastic lane changes gated on
/// target-lane gaps. Deterministic in (world.seed, step, id).
DiscreteAction env_policy(const WorldState& world, int vehicle_id);

/// Short-horizon filter for the AV: simulates the proposed action one step
/// ahead against constant-velocity neighbor predictions. Unsafe proposals
/// are replaced by abandoning the lane change when that is safe, otherwise
/// by hard braking. Identity for safe proposals and when disabled.
DiscreteAction safety_check(const WorldState& world, DiscreteAction av_action);

/// Advances every vehicle one step (dt = 1 s) under its action, detects
/// collisions on post-step geometry, then respawns env cars that left the
/// horizon or crashed into each other. Deterministic given (world, actions).
std::pair<WorldState, std::vector<CollisionEvent>> step(const WorldState& world,
                                                        const ActionMap& actions);

/// Non-overlapping spawn; AV mid-road in the middle lane; when requested the
/// attacker starts inside the AV's neighbor region. Throws std::runtime_error
/// when the road cannot host the car count.
WorldState init_world(const SimConfig& config, std::uint64_t seed, int n_env_cars,
                      bool with_attacker);

/// FNV-1a over the full world state (bit patterns of doubles included).
std::uint64_t world_hash(const WorldState& world);

double accel_of(LongitudinalAction ax, const ActionParams& p);

/// In-place one-step kinematics of a single vehicle under an action;
/// shared by step() and the safety-check predictor.
void advance_vehicle(VehicleState& v, DiscreteAction action, const SimConfig& cfg);

} // namespace hwadv::sim
