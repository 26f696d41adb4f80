#pragma once

#include <functional>
#include <utility>

#include "hwadv/sim/types.hpp"

namespace hwadv::judge {

/// Lane-marker occupancy of the two colliding cars one step before the
/// collision.
enum class PreCrashSituation : std::uint8_t {
  none_on_marker = 0,
  one_on_marker_crash_original_lane = 1,
  one_on_marker_crash_target_lane = 2,
  both_on_same_marker = 3,
  both_on_different_markers = 4,
};

enum class MeeKind : std::uint8_t { hard_brake = 0, abandon_lane_change = 1 };

struct Verdict {
  PreCrashSituation situation = PreCrashSituation::none_on_marker;
  int responsible = 0;
  bool principal_shared = false; // only for both_on_different_markers
  bool av_at_fault = false;
  MeeKind mee_expected = MeeKind::hard_brake;
  bool mee_used = false;
  int failure_code = 0;      // 0..7
  double attacker_reward = 0.0;
};

/// Supplies the action a vehicle takes in the crash state s'; the judge uses
/// it as the responsible car's evasive-effort indicator.
using NextActionFn = std::function<sim::DiscreteAction(int vehicle_id)>;

/// Marker taxonomy of the pre-crash state. For the single-marker rows the
/// collision partner's lane decides between the original-lane and
/// target-lane variants.
PreCrashSituation classify_situation(const sim::WorldState& s_pre, int a_id, int b_id);

/// Rear car is at fault unless a lane change caused the crash; when both
/// cars straddle different markers the car coming from the left lane is the
/// principal responsible party (shared responsibility).
std::pair<int, bool> responsible_party(PreCrashSituation situation,
                                       const sim::WorldState& s_pre, int a_id, int b_id);

/// Minimal evasive effort: hard braking for rear-end situations, abandoning
/// the change (keep or the opposite direction) for lane-change situations.
/// `change_direction` is the responsible car's active change direction and
/// is ignored for rear-end situations.
bool mee_check(PreCrashSituation situation, sim::LateralAction change_direction,
               sim::DiscreteAction next_action);

/// Full adjudication of a detected collision: situation, responsibility,
/// evasive effort, failure code 0..7 and the attacker reward cell. Crashes
/// not involving the AV produce a verdict with zero attacker reward.
Verdict judge(const sim::WorldState& s_pre, const sim::WorldState& s_crash, int a_id,
              int b_id, int av_id, const NextActionFn& next_action);

} // namespace hwadv::judge
