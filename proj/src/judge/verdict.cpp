#include "hwadv/judge/verdict.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "hwadv/sim/world.hpp"

namespace hwadv::judge {

namespace {

using sim::DiscreteAction;
using sim::LateralAction;
using sim::LateralPhase;
using sim::VehicleState;
using sim::WorldState;

/// Index of the interior boundary line the vehicle straddles, if any.
std::optional<int> marker_index(const VehicleState& v, const sim::RoadConfig& road) {
  const double lo = v.y - road.vehicle_width / 2.0;
  const double hi = v.y + road.vehicle_width / 2.0;
  for (int b = 1; b < road.lane_count; ++b) {
    const double marker = (b - 0.5) * road.lane_width;
    if (lo <= marker && marker <= hi) return b;
  }
  return std::nullopt;
}

const VehicleState& must_find(const WorldState& w, int id) {
  const VehicleState* v = w.find(id);
  if (!v) throw std::invalid_argument("judge: unknown vehicle id");
  return *v;
}

LateralAction change_direction_of(const VehicleState& v) {
  return v.phase == LateralPhase::changing_right ? LateralAction::change_right
                                                 : LateralAction::change_left;
}

int rear_of(const VehicleState& a, const VehicleState& b) {
  if (a.x != b.x) return a.x < b.x ? a.id : b.id;
  return std::min(a.id, b.id);
}

} // namespace

PreCrashSituation classify_situation(const WorldState& s_pre, int a_id, int b_id) {
  const sim::RoadConfig& road = s_pre.config.road;
  const VehicleState& a = must_find(s_pre, a_id);
  const VehicleState& b = must_find(s_pre, b_id);
  const auto ma = marker_index(a, road);
  const auto mb = marker_index(b, road);

  if (!ma && !mb) return PreCrashSituation::none_on_marker;
  if (ma && mb) {
    return *ma == *mb ? PreCrashSituation::both_on_same_marker
                      : PreCrashSituation::both_on_different_markers;
  }

  // Exactly one car straddles a marker; that car is mid lane change. Decide
  // whether its collision partner sits in the change's target lane or in the
  // original lane.
  const VehicleState& marker_car = ma ? a : b;
  const VehicleState& other = ma ? b : a;
  const int other_lane = sim::lane_of(road, other.y);
  if (other_lane == marker_car.to_lane && marker_car.to_lane != marker_car.from_lane)
    return PreCrashSituation::one_on_marker_crash_target_lane;
  return PreCrashSituation::one_on_marker_crash_original_lane;
}

std::pair<int, bool> responsible_party(PreCrashSituation situation,
                                       const WorldState& s_pre, int a_id, int b_id) {
  const sim::RoadConfig& road = s_pre.config.road;
  const VehicleState& a = must_find(s_pre, a_id);
  const VehicleState& b = must_find(s_pre, b_id);

  switch (situation) {
    case PreCrashSituation::none_on_marker:
    case PreCrashSituation::one_on_marker_crash_original_lane:
    case PreCrashSituation::both_on_same_marker:
      return {rear_of(a, b), false};
    case PreCrashSituation::one_on_marker_crash_target_lane: {
      const auto ma = marker_index(a, road);
      return {ma ? a.id : b.id, false};
    }
    case PreCrashSituation::both_on_different_markers: {
      // Right-hand traffic: the higher marker belongs to the car coming from
      // the left lane, which must yield.
      const auto ma = marker_index(a, road);
      const auto mb = marker_index(b, road);
      const int left_car = (ma && mb && *ma > *mb) ? a.id : b.id;
      return {left_car, true};
    }
  }
  return {rear_of(a, b), false};
}

bool mee_check(PreCrashSituation situation, LateralAction change_direction,
               DiscreteAction next_action) {
  switch (situation) {
    case PreCrashSituation::none_on_marker:
    case PreCrashSituation::one_on_marker_crash_original_lane:
    case PreCrashSituation::both_on_same_marker:
      return next_action.ax == sim::LongitudinalAction::hard_brake;
    case PreCrashSituation::one_on_marker_crash_target_lane:
    case PreCrashSituation::both_on_different_markers:
      // Anything but holding the change direction reverses lateral progress.
      return next_action.ay != change_direction;
  }
  return false;
}

Verdict judge(const WorldState& s_pre, const WorldState& s_crash, int a_id, int b_id,
              int av_id, const NextActionFn& next_action) {
  (void)s_crash; // collision is established by the caller on s_crash geometry

  Verdict v;
  v.situation = classify_situation(s_pre, a_id, b_id);
  const auto [responsible, shared] = responsible_party(v.situation, s_pre, a_id, b_id);
  v.responsible = responsible;
  v.principal_shared = shared;
  v.av_at_fault = responsible == av_id && (a_id == av_id || b_id == av_id);

  const VehicleState& resp = must_find(s_pre, responsible);
  v.mee_used = mee_check(v.situation, change_direction_of(resp), next_action(responsible));

  const bool lane_change_family =
      v.situation == PreCrashSituation::one_on_marker_crash_target_lane ||
      v.situation == PreCrashSituation::both_on_different_markers;
  v.mee_expected = lane_change_family ? MeeKind::abandon_lane_change : MeeKind::hard_brake;

  // Reward/failure-code cells, one family per marker taxonomy row.
  const bool dual_marker = v.situation == PreCrashSituation::both_on_different_markers;
  const double magnitude = dual_marker ? (v.mee_used ? 0.3 : 0.8) : (v.mee_used ? 0.5 : 1.0);
  if (v.av_at_fault) {
    if (v.situation == PreCrashSituation::one_on_marker_crash_target_lane)
      v.failure_code = v.mee_used ? 5 : 4;
    else if (dual_marker)
      v.failure_code = v.mee_used ? 7 : 6;
    else
      v.failure_code = v.mee_used ? 3 : 2;
    v.attacker_reward = magnitude;
  } else {
    v.failure_code = v.mee_used ? 1 : 0;
    const bool av_involved = a_id == av_id || b_id == av_id;
    v.attacker_reward = av_involved ? -magnitude : 0.0;
  }
  return v;
}

} // namespace hwadv::judge
