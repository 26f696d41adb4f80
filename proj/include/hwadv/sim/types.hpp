#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace hwadv::sim {

enum class Role : std::uint8_t { av = 0, attacker = 1, env = 2 };

enum class LongitudinalAction : std::uint8_t {
  maintain = 0,
  accelerate = 1,
  brake = 2,
  hard_brake = 3,
};

enum class LateralAction : std::uint8_t {
  keep = 0,
  change_left = 1,
  change_right = 2,
};

/// One of the 12 discrete actions: longitudinal x lateral choice.
struct DiscreteAction {
  LongitudinalAction ax = LongitudinalAction::maintain;
  LateralAction ay = LateralAction::keep;

  static constexpr int kCount = 12;

  constexpr int index() const { return static_cast<int>(ax) * 3 + static_cast<int>(ay); }

  static constexpr DiscreteAction from_index(int i) {
    return DiscreteAction{static_cast<LongitudinalAction>((i / 3) & 3),
                          static_cast<LateralAction>(i % 3)};
  }

  friend constexpr bool operator==(DiscreteAction a, DiscreteAction b) {
    return a.ax == b.ax && a.ay == b.ay;
  }
};

struct RoadConfig {
  int lane_count = 3;
  double lane_width = 3.6;     // m
  double speed_min = 20.0;     // m/s, spawn/desired-speed range lower bound
  double speed_max = 30.0;     // m/s, hard clamp
  double road_length = 400.0;  // m, despawn/respawn horizon around the AV
  double vehicle_length = 4.8; // m
  double vehicle_width = 1.8;  // m
};

/// Longitudinal acceleration per action and lane-change pacing.
struct ActionParams {
  double accelerate = 2.0;  // m/s^2
  double brake = -2.0;      // m/s^2
  double hard_brake = -4.0; // m/s^2
  int lane_change_steps = 3;
};

// Car-following keeps a worst-case braking distance: reaction headway plus
// the surplus of the ego's stopping distance over the leader's, so a leader
// who brakes to a stop can always be absorbed.
struct EnvPolicyParams {
  double headway_hard = 1.0;   // s, reaction term of the hard-brake envelope
  double headway_brake = 1.8;  // s, reaction term of the comfort envelope
  double headway_free = 2.5;   // s of plain headway above which to speed up
  double lane_change_prob = 0.003; // per in-lane step
  double safe_front_gap = 15.0;    // m, minimum bumper gap into a target lane
  double safe_rear_gap = 15.0;     // m
  double speed_tolerance = 0.5;    // m/s dead-band around desired speed
};

struct SafetyParams {
  bool enabled = true;
  double headway = 0.45; // s, predicted front headway below this is unsafe
};

struct SimConfig {
  RoadConfig road;
  ActionParams actions;
  EnvPolicyParams env;
  SafetyParams safety;
};

enum class LateralPhase : std::uint8_t {
  in_lane = 0,
  changing_left = 1,
  changing_right = 2,
};

/// Pose, velocity and lane-change bookkeeping of one car in road frame.
/// y = 0 is the rightmost lane center. Lane-change progress counts in
/// integer sub-steps of ActionParams::lane_change_steps so that state
/// evolution and trace replay are exact.
struct VehicleState {
  int id = 0;
  double x = 0.0;  // longitudinal, m
  double y = 0.0;  // lateral, m
  double vx = 0.0; // m/s
  LateralPhase phase = LateralPhase::in_lane;
  int progress_steps = 0; // 0..lane_change_steps while changing
  int from_lane = 0;
  int to_lane = 0;
  Role role = Role::env;
  double desired_speed = 0.0; // env car-following setpoint, m/s

  bool in_lane() const { return phase == LateralPhase::in_lane; }
};

struct CollisionEvent {
  int vehicle_a = 0; // always < vehicle_b
  int vehicle_b = 0;
  long long step_index = 0;
};

using ActionMap = std::map<int, DiscreteAction>;

struct WorldState {
  long long step_index = 0;
  std::vector<VehicleState> vehicles;
  std::uint64_t seed = 0; // base for counter-hashed per-step draws
  SimConfig config;

  const VehicleState* find(int id) const;
  VehicleState* find(int id);
  const VehicleState* find_role(Role role) const;
};

} // namespace hwadv::sim
