#pragma once

#include "hwadv/sim/types.hpp"

namespace hwadv::av {

struct RewardParams {
  double dx_safe_min = 10.0;    // m
  double dx_safe_headway = 1.0; // s; dx_safe = max(dx_safe_min, headway * vx)
  double v_des = 28.0;          // m/s
  double y_norm = 10.0;         // m^2-scale normalizer
  double v_norm = 10.0;         // (m/s)^2-scale normalizer
};

struct RewardTerms {
  double r_x = 0.0;
  double r_y = 0.0;
  double r_v = 0.0;
};

double effective_dx_safe(const RewardParams& params, double vx);

/// Lane center the AV currently occupies, or the target lane center while a
/// commanded change is active.
double desired_lateral(const sim::RoadConfig& road, const sim::VehicleState& av);

/// The three per-step shaping terms, each in (-1, 0] and zero exactly at its
/// setpoint. r_x is 0 when there is no lead vehicle or dx >= dx_safe.
RewardTerms reward_terms(bool has_lead, double dx, double dx_safe, double y,
                         double y_des, double vx, const RewardParams& params);

/// Per-step AV reward: mean of the three terms, or -2 on collision.
double reward_av(const sim::WorldState& world_before, const sim::WorldState& world_after,
                 bool collided, const RewardParams& params);

} // namespace hwadv::av
