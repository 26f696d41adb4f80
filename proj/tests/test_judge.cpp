#include <doctest.h>

#include <random>

#include "hwadv/judge/verdict.hpp"
#include "hwadv/sim/world.hpp"
#include "test_util.hpp"

using namespace hwadv;
using namespace hwadv::test;
using judge::MeeKind;
using judge::PreCrashSituation;
using judge::Verdict;
using sim::DiscreteAction;
using sim::LateralAction;
using sim::LongitudinalAction;

namespace {

constexpr DiscreteAction kMaintain{};
constexpr DiscreteAction kHardBrake{LongitudinalAction::hard_brake, LateralAction::keep};
constexpr DiscreteAction kLeft{LongitudinalAction::maintain, LateralAction::change_left};
constexpr DiscreteAction kRight{LongitudinalAction::maintain, LateralAction::change_right};

judge::NextActionFn fixed(DiscreteAction a) {
  return [a](int) { return a; };
}

struct CrashScene {
  sim::WorldState pre;
  sim::WorldState crash;
};

// Rear car 1 runs into car 0 in lane 1; no markers involved.
CrashScene rear_end_scene(sim::Role rear_role) {
  sim::SimConfig cfg;
  auto front = car(0, 1, 106.8, 20);
  auto rear = car(1, 1, 100.0, 25, rear_role);
  auto pre = make_world({front, rear}, cfg);
  sim::ActionMap m{{0, kMaintain}, {1, kMaintain}};
  auto [crash, events] = sim::step(pre, m);
  REQUIRE(events.size() == 1);
  return {pre, crash};
}

// Car 1 changes 0 -> 1 and hits car 0 already in lane 1 (the target lane).
CrashScene cut_in_scene(sim::Role changer_role) {
  sim::SimConfig cfg;
  auto target_car = car(0, 1, 103.0, 20);
  auto changer = changing(1, 0, 1, 1, 100.0, 20, cfg, changer_role);
  auto pre = make_world({target_car, changer}, cfg);
  REQUIRE(sim::detect_collisions(pre).empty());
  sim::ActionMap m{{0, kMaintain}, {1, kLeft}};
  auto [crash, events] = sim::step(pre, m);
  REQUIRE(events.size() == 1);
  return {pre, crash};
}

// Cars converge into the middle lane from lanes 0 and 2; both straddle
// different markers one step before the collision. Car 1 comes from the left.
CrashScene convergence_scene(sim::Role left_role) {
  sim::SimConfig cfg;
  auto from_right = changing(0, 0, 1, 2, 100.0, 20, cfg);
  auto from_left = changing(1, 2, 1, 2, 101.0, 20, cfg, left_role);
  auto pre = make_world({from_right, from_left}, cfg);
  REQUIRE(sim::detect_collisions(pre).empty());
  sim::ActionMap m{{0, kLeft}, {1, kRight}};
  auto [crash, events] = sim::step(pre, m);
  REQUIRE(events.size() == 1);
  return {pre, crash};
}

Verdict judge_scene(const CrashScene& s, int av_id, DiscreteAction responsible_next) {
  return judge::judge(s.pre, s.crash, 0, 1, av_id, fixed(responsible_next));
}

} // namespace

TEST_CASE("classify: both cars centered in their lanes") {
  const auto s = rear_end_scene(sim::Role::env);
  CHECK(judge::classify_situation(s.pre, 0, 1) == PreCrashSituation::none_on_marker);
}

TEST_CASE("classify: one on marker, partner in the change's target lane") {
  const auto s = cut_in_scene(sim::Role::env);
  CHECK(judge::classify_situation(s.pre, 0, 1) ==
        PreCrashSituation::one_on_marker_crash_target_lane);
}

TEST_CASE("classify: one on marker, partner in the original lane") {
  sim::SimConfig cfg;
  // car 1 straddles the 0/1 marker; car 0 sits ahead in lane 0
  auto original = car(0, 0, 106.0, 4);
  auto changer = changing(1, 0, 1, 1, 101.0, 8, cfg);
  auto pre = make_world({original, changer}, cfg);
  REQUIRE(sim::detect_collisions(pre).empty());
  CHECK(judge::classify_situation(pre, 0, 1) ==
        PreCrashSituation::one_on_marker_crash_original_lane);
  // abandoning drops car 1 back into lane 0 where it rear-ends car 0
  auto [crash, events] = sim::step(pre, {{0, kMaintain}, {1, kMaintain}});
  REQUIRE(events.size() == 1);
  const Verdict v = judge::judge(pre, crash, 0, 1, 1, fixed(kMaintain));
  CHECK(v.responsible == 1); // rear car
  CHECK(v.failure_code == 2);
  CHECK(v.mee_expected == MeeKind::hard_brake);
}

TEST_CASE("classify: both on the same marker") {
  sim::SimConfig cfg;
  auto a = changing(0, 0, 1, 1, 100.0, 25, cfg);
  auto b = changing(1, 1, 0, 1, 106.0, 20, cfg);
  auto pre = make_world({a, b}, cfg);
  CHECK(judge::classify_situation(pre, 0, 1) == PreCrashSituation::both_on_same_marker);
}

TEST_CASE("classify: both on different markers") {
  const auto s = convergence_scene(sim::Role::env);
  CHECK(judge::classify_situation(s.pre, 0, 1) ==
        PreCrashSituation::both_on_different_markers);
}

TEST_CASE("responsible: rear car without markers, not shared") {
  const auto s = rear_end_scene(sim::Role::env);
  const auto [id, shared] = responsible_party(
      PreCrashSituation::none_on_marker, s.pre, 0, 1);
  CHECK(id == 1);
  CHECK_FALSE(shared);
}

TEST_CASE("responsible: cut-in blames the lane-change car") {
  const auto s = cut_in_scene(sim::Role::env);
  const auto [id, shared] = responsible_party(
      PreCrashSituation::one_on_marker_crash_target_lane, s.pre, 0, 1);
  CHECK(id == 1);
  CHECK_FALSE(shared);
}

TEST_CASE("responsible: simultaneous convergence blames the left car, shared") {
  const auto s = convergence_scene(sim::Role::env);
  const auto [id, shared] = responsible_party(
      PreCrashSituation::both_on_different_markers, s.pre, 0, 1);
  CHECK(id == 1); // came from lane 2, the left lane
  CHECK(shared);
}

TEST_CASE("mee_check: hard brake satisfies the rear-end expectation") {
  CHECK(judge::mee_check(PreCrashSituation::none_on_marker, LateralAction::change_left,
                         kHardBrake));
  CHECK_FALSE(judge::mee_check(PreCrashSituation::none_on_marker,
                               LateralAction::change_left, kMaintain));
}

TEST_CASE("mee_check: abandoning means anything but holding the change direction") {
  const auto s = PreCrashSituation::one_on_marker_crash_target_lane;
  CHECK(judge::mee_check(s, LateralAction::change_left, kRight)); // opposite
  CHECK(judge::mee_check(s, LateralAction::change_left, kMaintain)); // keep reverses
  CHECK_FALSE(judge::mee_check(s, LateralAction::change_left, kLeft));
}

TEST_CASE("judge: the full reward table, all twelve cells") {
  struct Cell {
    int av_id; // 1 makes the responsible car the AV, 0 an env car
    DiscreteAction next;
    int fc;
    double reward;
  };

  SUBCASE("rear-end family") {
    const Cell cells[] = {
        {0, kMaintain, 0, -1.0},
        {0, kHardBrake, 1, -0.5},
        {1, kMaintain, 2, 1.0},
        {1, kHardBrake, 3, 0.5},
    };
    for (const auto& c : cells) {
      const auto s = rear_end_scene(c.av_id == 1 ? sim::Role::av : sim::Role::env);
      const Verdict v = judge_scene(s, c.av_id, c.next);
      CHECK(v.failure_code == c.fc);
      CHECK(v.attacker_reward == c.reward);
      CHECK(v.responsible == 1);
      CHECK(v.mee_expected == MeeKind::hard_brake);
    }
  }

  SUBCASE("target-lane family") {
    const Cell cells[] = {
        {0, kLeft, 0, -1.0},
        {0, kMaintain, 1, -0.5}, // keep abandons the change
        {1, kLeft, 4, 1.0},
        {1, kRight, 5, 0.5},
    };
    for (const auto& c : cells) {
      const auto s = cut_in_scene(c.av_id == 1 ? sim::Role::av : sim::Role::env);
      const Verdict v = judge_scene(s, c.av_id, c.next);
      CHECK(v.failure_code == c.fc);
      CHECK(v.attacker_reward == c.reward);
      CHECK(v.responsible == 1);
      CHECK(v.mee_expected == MeeKind::abandon_lane_change);
    }
  }

  SUBCASE("different-markers family") {
    const Cell cells[] = {
        {0, kRight, 0, -0.8},
        {0, kMaintain, 1, -0.3},
        {1, kRight, 6, 0.8},
        {1, kLeft, 7, 0.3},
    };
    for (const auto& c : cells) {
      const auto s = convergence_scene(c.av_id == 1 ? sim::Role::av : sim::Role::env);
      const Verdict v = judge_scene(s, c.av_id, c.next);
      CHECK(v.failure_code == c.fc);
      CHECK(v.attacker_reward == c.reward);
      CHECK(v.responsible == 1);
      CHECK(v.principal_shared);
      CHECK(v.mee_expected == MeeKind::abandon_lane_change);
    }
  }
}

TEST_CASE("judge: reward sign matches fault; magnitudes from the fixed set") {
  for (const bool av_responsible : {false, true}) {
    for (const auto& scene :
         {rear_end_scene(av_responsible ? sim::Role::av : sim::Role::env),
          cut_in_scene(av_responsible ? sim::Role::av : sim::Role::env),
          convergence_scene(av_responsible ? sim::Role::av : sim::Role::env)}) {
      for (const auto next : {kMaintain, kHardBrake, kLeft, kRight}) {
        const Verdict v = judge_scene(scene, av_responsible ? 1 : 0, next);
        CHECK(v.av_at_fault == av_responsible);
        CHECK((v.attacker_reward > 0) == v.av_at_fault);
        const double mag = std::abs(v.attacker_reward);
        CHECK((mag == 0.3 || mag == 0.5 || mag == 0.8 || mag == 1.0));
        if (v.failure_code <= 1) CHECK_FALSE(v.av_at_fault);
        if (v.av_at_fault) CHECK(v.failure_code >= 2);
      }
    }
  }
}

TEST_CASE("judge: swapping the pair order never changes the responsible car") {
  for (const auto& scene : {rear_end_scene(sim::Role::env), cut_in_scene(sim::Role::env),
                            convergence_scene(sim::Role::env)}) {
    const Verdict ab = judge::judge(scene.pre, scene.crash, 0, 1, 0, fixed(kMaintain));
    const Verdict ba = judge::judge(scene.pre, scene.crash, 1, 0, 0, fixed(kMaintain));
    CHECK(ab.responsible == ba.responsible);
    CHECK(ab.failure_code == ba.failure_code);
    CHECK(ab.situation == ba.situation);
  }
}

TEST_CASE("judge: env-env crashes produce a verdict with zero attacker reward") {
  const auto s = rear_end_scene(sim::Role::env);
  const Verdict v = judge::judge(s.pre, s.crash, 0, 1, /*av_id=*/99, fixed(kMaintain));
  CHECK_FALSE(v.av_at_fault);
  CHECK(v.attacker_reward == 0.0);
  CHECK(v.failure_code <= 1);
}

TEST_CASE("judge: pure function of its arguments") {
  const auto s = cut_in_scene(sim::Role::av);
  const Verdict a = judge_scene(s, 1, kLeft);
  const Verdict b = judge_scene(s, 1, kLeft);
  CHECK(a.failure_code == b.failure_code);
  CHECK(a.attacker_reward == b.attacker_reward);
  CHECK(a.responsible == b.responsible);
  CHECK(a.mee_used == b.mee_used);
}
