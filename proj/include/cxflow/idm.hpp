#pragma once

#include <limits>

#include "cxflow/vehicle.hpp"

namespace cxflow {

inline constexpr double kInfGap = std::numeric_limits<double>::infinity();

// IDM car-following acceleration. gap is the bumper-to-bumper distance to the
// leader (kInfGap for a free road). Result is clamped to
// [-b_emergency, a_max]; a non-positive gap returns -b_emergency.
double idm_accel(double v, double gap, double leader_v, const IdmParams& p);

// Collision-avoidance cap: the largest acceleration the follower may apply
// this step such that, braking at b_emergency from the next step onward, it
// cannot reach the leader's rear even if the leader brakes at b_emergency
// starting now. Returns min(proposed_a, cap), never below -b_emergency.
double safe_speed_cap(double proposed_a, double v, double gap, double leader_v,
                      const IdmParams& p, double dt = 1.0);

// Total displacement of a vehicle with initial speed u that brakes at rate b
// every step (first step already braked), with time step dt.
double brake_displacement(double u, double b, double dt = 1.0);

} // namespace cxflow
