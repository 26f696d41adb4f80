#include "hwadv/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>

#include "hwadv/sim/hash_rng.hpp"

namespace hwadv::sim {

namespace {

constexpr double kDt = 1.0;
constexpr double kMinSpeedForHeadway = 0.1;

double bumper_gap(const RoadConfig& road, double front_x, double rear_x) {
  return front_x - rear_x - road.vehicle_length;
}

} // namespace

const VehicleState* WorldState::find(int id) const {
  for (const auto& v : vehicles)
    if (v.id == id) return &v;
  return nullptr;
}

VehicleState* WorldState::find(int id) {
  for (auto& v : vehicles)
    if (v.id == id) return &v;
  return nullptr;
}

const VehicleState* WorldState::find_role(Role role) const {
  for (const auto& v : vehicles)
    if (v.role == role) return &v;
  return nullptr;
}

double lane_center(const RoadConfig& road, int lane) { return lane * road.lane_width; }

int lane_of(const RoadConfig& road, double y) {
  int lane = static_cast<int>(std::lround(y / road.lane_width));
  return std::clamp(lane, 0, road.lane_count - 1);
}

double lateral_position(const RoadConfig& road, const ActionParams& actions,
                        const VehicleState& v) {
  const double from = lane_center(road, v.from_lane);
  const double to = lane_center(road, v.to_lane);
  const double frac =
      actions.lane_change_steps > 0
          ? static_cast<double>(v.progress_steps) / actions.lane_change_steps
          : 0.0;
  return from + (to - from) * frac;
}

bool on_marker(const VehicleState& v, const RoadConfig& road) {
  const double lo = v.y - road.vehicle_width / 2.0;
  const double hi = v.y + road.vehicle_width / 2.0;
  for (int b = 1; b < road.lane_count; ++b) {
    const double marker = (b - 0.5) * road.lane_width;
    if (lo <= marker && marker <= hi) return true;
  }
  return false;
}

double accel_of(LongitudinalAction ax, const ActionParams& p) {
  switch (ax) {
    case LongitudinalAction::maintain: return 0.0;
    case LongitudinalAction::accelerate: return p.accelerate;
    case LongitudinalAction::brake: return p.brake;
    case LongitudinalAction::hard_brake: return p.hard_brake;
  }
  return 0.0;
}

void advance_vehicle(VehicleState& v, DiscreteAction action, const SimConfig& cfg) {
  const RoadConfig& road = cfg.road;

  // Longitudinal: exact piecewise integration with the velocity clamped to
  // [0, speed_max]; after the clamp engages the car coasts at the bound.
  const double a = accel_of(action.ax, cfg.actions);
  const double v_end_unclamped = v.vx + a * kDt;
  const double v_end = std::clamp(v_end_unclamped, 0.0, road.speed_max);
  double dx;
  if (v_end == v_end_unclamped) {
    dx = v.vx * kDt + 0.5 * a * kDt * kDt;
  } else {
    const double t_sat = (v_end - v.vx) / a;
    dx = v.vx * t_sat + 0.5 * a * t_sat * t_sat + v_end * (kDt - t_sat);
  }
  v.x += dx;
  v.vx = v_end;

  // Lateral: a change advances only while its direction is held; keep or the
  // opposite direction reverses progress at the same rate.
  if (v.in_lane()) {
    const int lane = v.from_lane;
    if (action.ay == LateralAction::change_left && lane + 1 < road.lane_count) {
      v.phase = LateralPhase::changing_left;
      v.to_lane = lane + 1;
      v.progress_steps = 0;
    } else if (action.ay == LateralAction::change_right && lane - 1 >= 0) {
      v.phase = LateralPhase::changing_right;
      v.to_lane = lane - 1;
      v.progress_steps = 0;
    } else {
      v.y = lane_center(road, lane);
      return;
    }
  }
  const LateralAction continue_dir = v.phase == LateralPhase::changing_left
                                         ? LateralAction::change_left
                                         : LateralAction::change_right;
  v.progress_steps += action.ay == continue_dir ? 1 : -1;
  if (v.progress_steps >= cfg.actions.lane_change_steps) {
    v.from_lane = v.to_lane;
    v.phase = LateralPhase::in_lane;
    v.progress_steps = 0;
  } else if (v.progress_steps <= 0) {
    v.to_lane = v.from_lane;
    v.phase = LateralPhase::in_lane;
    v.progress_steps = 0;
  }
  v.y = lateral_position(road, cfg.actions, v);
}

std::vector<CollisionEvent> detect_collisions(const WorldState& world) {
  std::vector<CollisionEvent> events;
  const RoadConfig& road = world.config.road;
  const auto& vs = world.vehicles;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      if (std::abs(vs[i].x - vs[j].x) < road.vehicle_length &&
          std::abs(vs[i].y - vs[j].y) < road.vehicle_width) {
        events.push_back({std::min(vs[i].id, vs[j].id), std::max(vs[i].id, vs[j].id),
                          world.step_index});
      }
    }
  }
  return events;
}

std::array<int, kNeighborSlots> nearest_neighbors(const WorldState& world, int ego_id) {
  std::array<int, kNeighborSlots> slots;
  slots.fill(kNoVehicle);
  std::array<double, kNeighborSlots> best;
  best.fill(std::numeric_limits<double>::infinity());

  const VehicleState* ego = world.find(ego_id);
  if (!ego) return slots;
  const RoadConfig& road = world.config.road;

  for (const auto& v : world.vehicles) {
    if (v.id == ego_id) continue;
    const int lane = lane_of(road, v.y);
    const double dx = v.x - ego->x;
    const int slot = lane * 2 + (dx >= 0.0 ? 0 : 1);
    const double adx = std::abs(dx);
    if (adx < best[slot] || (adx == best[slot] && v.id < slots[slot])) {
      best[slot] = adx;
      slots[slot] = v.id;
    }
  }
  return slots;
}

int neighbor_slot_of(const std::array<int, kNeighborSlots>& slots, int id) {
  for (int i = 0; i < kNeighborSlots; ++i)
    if (slots[i] == id) return i;
  return kNoVehicle;
}

namespace {

const VehicleState* nearest_front(const WorldState& world, const VehicleState& ego,
                                  int lane) {
  const VehicleState* best = nullptr;
  for (const auto& v : world.vehicles) {
    if (v.id == ego.id || lane_of(world.config.road, v.y) != lane) continue;
    if (v.x < ego.x) continue;
    if (!best || v.x - ego.x < best->x - ego.x ||
        (v.x - ego.x == best->x - ego.x && v.id < best->id))
      best = &v;
  }
  return best;
}

const VehicleState* nearest_rear(const WorldState& world, const VehicleState& ego,
                                 int lane) {
  const VehicleState* best = nullptr;
  for (const auto& v : world.vehicles) {
    if (v.id == ego.id || lane_of(world.config.road, v.y) != lane) continue;
    if (v.x >= ego.x) continue;
    if (!best || ego.x - v.x < ego.x - best->x ||
        (ego.x - v.x == ego.x - best->x && v.id < best->id))
      best = &v;
  }
  return best;
}

double front_headway(const WorldState& world, const VehicleState& ego, int lane) {
  const VehicleState* lead = nearest_front(world, ego, lane);
  if (!lead) return std::numeric_limits<double>::infinity();
  return bumper_gap(world.config.road, lead->x, ego.x) /
         std::max(ego.vx, kMinSpeedForHeadway);
}

constexpr double kBrakeDistanceMargin = 2.0; // m

// Bumper gap below which a rear car at v_rear can no longer absorb a front
// car at v_front that brakes to a stop at `decel`, after one reaction
// headway at full speed.
double required_follow_gap(double v_rear, double v_front, double decel,
                           double headway) {
  const double a = std::abs(decel);
  const double surplus =
      std::max(0.0, v_rear * v_rear - v_front * v_front) / (2.0 * a);
  return headway * v_rear + surplus + kBrakeDistanceMargin;
}

// Margin of the current front gap over the worst-case braking envelope.
double brake_margin(const WorldState& world, const VehicleState& ego, int lane,
                    double decel, double headway_term) {
  const VehicleState* lead = nearest_front(world, ego, lane);
  if (!lead) return std::numeric_limits<double>::infinity();
  return bumper_gap(world.config.road, lead->x, ego.x) -
         required_follow_gap(ego.vx, lead->vx, decel, headway_term);
}

bool lane_change_gap_safe(const WorldState& world, const VehicleState& ego,
                          int target_lane) {
  const EnvPolicyParams& env = world.config.env;
  const RoadConfig& road = world.config.road;
  const double brake = world.config.actions.brake;
  if (const VehicleState* front = nearest_front(world, ego, target_lane)) {
    const double need =
        std::max(env.safe_front_gap,
                 required_follow_gap(ego.vx, front->vx, brake, env.headway_brake));
    if (bumper_gap(road, front->x, ego.x) < need) return false;
  }
  if (const VehicleState* rear = nearest_rear(world, ego, target_lane)) {
    const double need =
        std::max(env.safe_rear_gap,
                 required_follow_gap(rear->vx, ego.vx, brake, env.headway_brake));
    if (bumper_gap(road, ego.x, rear->x) < need) return false;
  }
  return true;
}

} // namespace

DiscreteAction env_policy(const WorldState& world, int vehicle_id) {
  const VehicleState* vp = world.find(vehicle_id);
  if (!vp) return {};
  const VehicleState& v = *vp;
  const SimConfig& cfg = world.config;
  const EnvPolicyParams& env = cfg.env;
  const int lane = lane_of(cfg.road, v.y);

  const auto hard_margin = [&](int l) {
    return brake_margin(world, v, l, cfg.actions.hard_brake, env.headway_hard);
  };
  const auto soft_margin = [&](int l) {
    return brake_margin(world, v, l, cfg.actions.brake, env.headway_brake);
  };
  double headway = front_headway(world, v, lane);
  double hard = hard_margin(lane);
  double soft = soft_margin(lane);
  if (!v.in_lane()) {
    headway = std::min(headway, front_headway(world, v, v.to_lane));
    hard = std::min(hard, hard_margin(v.to_lane));
    soft = std::min(soft, soft_margin(v.to_lane));
  }

  LongitudinalAction ax;
  if (hard < 0.0)
    ax = LongitudinalAction::hard_brake;
  else if (soft < 0.0)
    ax = LongitudinalAction::brake;
  else if (v.vx > v.desired_speed + env.speed_tolerance)
    ax = LongitudinalAction::brake;
  else if (v.vx < v.desired_speed - env.speed_tolerance && headway > env.headway_free)
    ax = LongitudinalAction::accelerate;
  else
    ax = LongitudinalAction::maintain;

  LateralAction ay = LateralAction::keep;
  if (!v.in_lane()) {
    // Hold the change unless the target lane closed up; keep abandons it.
    if (hard_margin(v.to_lane) >= 0.0)
      ay = v.phase == LateralPhase::changing_left ? LateralAction::change_left
                                                  : LateralAction::change_right;
  } else if (soft >= 0.0) {
    const double u =
        unit_draw(world.seed, world.step_index, v.id, kDrawEnvLaneChange);
    if (u < env.lane_change_prob) {
      const double udir =
          unit_draw(world.seed, world.step_index, v.id, kDrawEnvDirection);
      const int first = udir < 0.5 ? 1 : -1;
      for (const int dir : {first, -first}) {
        const int target = lane + dir;
        if (target < 0 || target >= cfg.road.lane_count) continue;
        if (lane_change_gap_safe(world, v, target)) {
          ay = dir > 0 ? LateralAction::change_left : LateralAction::change_right;
          break;
        }
      }
    }
  }
  return {ax, ay};
}

DiscreteAction safety_check(const WorldState& world, DiscreteAction av_action) {
  const SimConfig& cfg = world.config;
  if (!cfg.safety.enabled) return av_action;
  const VehicleState* av = world.find_role(Role::av);
  if (!av) return av_action;
  const RoadConfig& road = cfg.road;

  const double hard = cfg.actions.hard_brake;
  const auto safe = [&](DiscreteAction a) {
    VehicleState ego = *av;
    advance_vehicle(ego, a, cfg);
    const int ego_lane = lane_of(road, ego.y);
    // An active change also claims its target lane, including the rear gap
    // (cutting in front of someone is the ego's hazard to avoid).
    const int claim_lane = ego.in_lane() ? ego_lane : ego.to_lane;
    for (const auto& other : world.vehicles) {
      if (other.id == av->id) continue;
      const double ox = other.x + other.vx * kDt; // constant-velocity prediction
      if (std::abs(ego.x - ox) < road.vehicle_length &&
          std::abs(ego.y - other.y) < road.vehicle_width)
        return false;
      const int other_lane = lane_of(road, other.y);
      if (other_lane != ego_lane && other_lane != claim_lane) continue;
      if (ox >= ego.x) {
        if (bumper_gap(road, ox, ego.x) <
            required_follow_gap(ego.vx, other.vx, hard, cfg.safety.headway))
          return false;
      } else if (other_lane == claim_lane && !ego.in_lane()) {
        // the follower absorbs the cut-in only with its own reaction time
        if (bumper_gap(road, ego.x, ox) <
            required_follow_gap(other.vx, ego.vx, hard, cfg.env.headway_hard))
          return false;
      }
    }
    return true;
  };

  if (safe(av_action)) return av_action;
  if (av_action.ay != LateralAction::keep) {
    const DiscreteAction abandon{av_action.ax, LateralAction::keep};
    if (safe(abandon)) return abandon;
  }
  return {LongitudinalAction::hard_brake, LateralAction::keep};
}

namespace {

bool try_respawn(WorldState& w, VehicleState& v, const VehicleState& av) {
  const RoadConfig& road = w.config.road;
  const double horizon = road.road_length / 2.0;
  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    const bool fell_behind = v.x < av.x;
    double side;
    if (std::abs(v.x - av.x) > horizon) {
      side = fell_behind ? 1.0 : -1.0; // re-enter on the opposite side
    } else {
      side = unit_draw(w.seed, w.step_index, v.id, kDrawRespawnSide, attempt) < 0.5
                 ? 1.0
                 : -1.0;
    }
    const double ud = unit_draw(w.seed, w.step_index, v.id, kDrawRespawnDist, attempt);
    const double ul = unit_draw(w.seed, w.step_index, v.id, kDrawRespawnLane, attempt);
    const double us = unit_draw(w.seed, w.step_index, v.id, kDrawRespawnSpeed, attempt);
    const double dist = horizon * (0.70 + 0.25 * ud);
    const int lane = std::min(road.lane_count - 1, static_cast<int>(ul * road.lane_count));
    const double x = av.x + side * dist;

    bool clear = true;
    for (const auto& other : w.vehicles) {
      if (other.id == v.id) continue;
      if (lane_of(road, other.y) != lane) continue;
      if (std::abs(other.x - x) < road.vehicle_length + 15.0) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;

    v.x = x;
    v.y = lane_center(road, lane);
    v.from_lane = v.to_lane = lane;
    v.phase = LateralPhase::in_lane;
    v.progress_steps = 0;
    v.desired_speed = road.speed_min + us * (road.speed_max - road.speed_min);
    v.vx = v.desired_speed;
    return true;
  }
  return false; // stays put; eligible again next step
}

} // namespace

std::pair<WorldState, std::vector<CollisionEvent>> step(const WorldState& world,
                                                        const ActionMap& actions) {
  WorldState next = world;
  next.step_index = world.step_index + 1;

  for (auto& v : next.vehicles) {
    const auto it = actions.find(v.id);
    const DiscreteAction a = it != actions.end() ? it->second : DiscreteAction{};
    advance_vehicle(v, a, next.config);
  }

  std::vector<CollisionEvent> events = detect_collisions(next);

  // Keep density constant: env cars that drifted out of the horizon respawn
  // on the far side; env-env collision pairs are recycled the same way.
  if (const VehicleState* av = next.find_role(Role::av)) {
    const VehicleState av_copy = *av;
    const double horizon = next.config.road.road_length / 2.0;
    for (auto& v : next.vehicles) {
      if (v.role != Role::env) continue;
      bool recycle = std::abs(v.x - av_copy.x) > horizon;
      if (!recycle) {
        for (const auto& e : events) {
          if (e.vehicle_a != v.id && e.vehicle_b != v.id) continue;
          const VehicleState* other =
              next.find(e.vehicle_a == v.id ? e.vehicle_b : e.vehicle_a);
          if (other && other->role == Role::env) {
            recycle = true;
            break;
          }
        }
      }
      if (recycle) try_respawn(next, v, av_copy);
    }
  }
  return {std::move(next), std::move(events)};
}

WorldState init_world(const SimConfig& config, std::uint64_t seed, int n_env_cars,
                      bool with_attacker) {
  const RoadConfig& road = config.road;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  const double horizon = road.road_length / 2.0;
  const int av_lane = road.lane_count / 2;

  for (int trial = 0; trial < 100; ++trial) {
    WorldState w;
    w.config = config;
    w.seed = seed;
    w.step_index = 0;

    VehicleState av;
    av.id = 0;
    av.role = Role::av;
    av.from_lane = av.to_lane = av_lane;
    av.y = lane_center(road, av_lane);
    av.x = road.road_length / 2.0;
    av.vx = road.speed_min + u01(gen) * (road.speed_max - road.speed_min);
    av.desired_speed = road.speed_max;
    w.vehicles.push_back(av);

    double attacker_offset = 0.0;
    int attacker_lane = av_lane;
    if (with_attacker) {
      VehicleState att;
      att.id = 1;
      att.role = Role::attacker;
      attacker_lane = std::min(road.lane_count - 1,
                               static_cast<int>(u01(gen) * road.lane_count));
      att.from_lane = att.to_lane = attacker_lane;
      att.y = lane_center(road, attacker_lane);
      const double side = u01(gen) < 0.5 ? 1.0 : -1.0;
      attacker_offset = side * (15.0 + u01(gen) * 15.0);
      att.x = av.x + attacker_offset;
      att.vx = std::clamp(av.vx + (u01(gen) * 4.0 - 2.0), 0.0, road.speed_max);
      att.desired_speed = att.vx;
      w.vehicles.push_back(att);
    }

    bool placed_all = true;
    for (int i = 0; i < n_env_cars; ++i) {
      VehicleState env;
      env.id = 2 + i;
      env.role = Role::env;
      bool placed = false;
      for (int draw = 0; draw < 200 && !placed; ++draw) {
        const int lane = std::min(road.lane_count - 1,
                                  static_cast<int>(u01(gen) * road.lane_count));
        const double x = av.x + (u01(gen) * 2.0 - 1.0) * 0.9 * horizon;
        const double desired =
            road.speed_min + u01(gen) * (road.speed_max - road.speed_min);
        const double vx =
            std::clamp(desired + (u01(gen) * 2.0 - 1.0), 0.0, road.speed_max);

        // Never spawn inside the AV's immediate front/rear corridor, and keep
        // the attacker the nearest car on its side of the AV's lane.
        if (lane == av_lane && std::abs(x - av.x) < 30.0) continue;
        if (with_attacker && lane == attacker_lane &&
            (x - av.x) * attacker_offset > 0.0 &&
            std::abs(x - av.x) < std::abs(attacker_offset) + 10.0)
          continue;

        bool clear = true;
        for (const auto& other : w.vehicles) {
          if (lane_of(road, other.y) != lane) continue;
          const double dist = std::abs(other.x - x);
          const double closing = x < other.x ? vx - other.vx : other.vx - vx;
          const double need =
              road.vehicle_length + 8.0 + 2.0 * std::max(0.0, closing);
          if (dist < need) {
            clear = false;
            break;
          }
        }
        if (!clear) continue;

        env.from_lane = env.to_lane = lane;
        env.y = lane_center(road, lane);
        env.x = x;
        env.vx = vx;
        env.desired_speed = desired;
        placed = true;
      }
      if (!placed) {
        placed_all = false;
        break;
      }
      w.vehicles.push_back(env);
    }
    if (!placed_all) continue;

    if (!detect_collisions(w).empty()) continue;
    if (with_attacker &&
        neighbor_slot_of(nearest_neighbors(w, 0), 1) == kNoVehicle)
      continue;
    return w;
  }
  throw std::runtime_error(
      "init_world: spawn failed after bounded retries (road too short for car count)");
}

std::uint64_t world_hash(const WorldState& world) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::uint64_t value) {
    h ^= value;
    h *= 0x100000001b3ULL;
  };
  const auto mix_double = [&](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    mix(bits);
  };
  mix(static_cast<std::uint64_t>(world.step_index));
  mix(world.seed);
  mix(world.vehicles.size());
  for (const auto& v : world.vehicles) {
    mix(static_cast<std::uint64_t>(v.id));
    mix_double(v.x);
    mix_double(v.y);
    mix_double(v.vx);
    mix(static_cast<std::uint64_t>(v.phase));
    mix(static_cast<std::uint64_t>(v.progress_steps));
    mix(static_cast<std::uint64_t>(v.from_lane));
    mix(static_cast<std::uint64_t>(v.to_lane));
    mix(static_cast<std::uint64_t>(v.role));
    mix_double(v.desired_speed);
  }
  return h;
}

} // namespace hwadv::sim
