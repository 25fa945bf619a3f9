#pragma once

#include <string>
#include <vector>

#include "cxflow/perception.hpp"
#include "cxflow/world.hpp"

namespace cxflow {

// Per-RV decisions are carried as DecisionRecord (metrics.hpp): vehicle,
// stream, raw Stop/Go output and the lane-front flag.
using Decision = DecisionRecord;

struct Phase {
    uint32_t green_mask = 0; // canonical slot bits
    double green = 30.0, yellow = 3.0, all_red = 2.0;
};

struct PhasePlan {
    std::vector<Phase> phases;

    double cycle() const;
    // every phase's green set must be pairwise conflict-free
    void validate(const Intersection& geo) const;
};

// Standard protected-left plan: (N-C,S-C), (N-L,S-L), (E-C,W-C), (E-L,W-L),
// 30 s green / 3 s yellow / 2 s all-red. In 12-direction mode the right-turn
// streams join the phases they are compatible with.
PhasePlan default_phase_plan(const Intersection& geo);

// Green slot mask at time t; empty during yellow and all-red intervals.
uint32_t tl_controller(const PhasePlan& plan, const Intersection& geo, double t);

enum class EventKind : uint8_t { Blackout, RvDrop };
enum class SuccessorKind : uint8_t { NoTL, Policy };

struct EventSpec {
    EventKind kind = EventKind::Blackout;
    int at_step = 0;
    SuccessorKind successor = SuccessorKind::NoTL; // blackout only
    double target_rate = 0.0;                      // rv drop only
};

// Commanded acceleration for an in-zone RV that has not yet been granted
// entry: Go floors the throttle at a_max, Stop decelerates at -v^2/(2 d) with
// d the distance to the entrance or to the leader's rear, whichever is
// closer, and holds once stopped at the line.
double actuation(Action action, const Vehicle& veh, const World& world);

// Priority of a direction from its normalized waiting time and queue length.
double priority_score(double queue_len, double avg_wait, int lanes);

// Conflict-resolution gate. Front RVs at the entrance that chose Go are
// blocked while any conflicting stream has a vehicle inside (or committed to
// enter); the rest are granted greedily by descending priority score, each
// grant blocking conflicting candidates. Granted vehicles get entry_granted
// set. Returns granted ids in grant order.
std::vector<int> resolve_conflicts(World& world, const std::vector<Decision>& decisions,
                                   const std::vector<StreamStats>& stats);

// Uncontrolled right-of-way: enter as soon as the first conflict zone on the
// path is momentarily clear. Spillback and approaching cross traffic are
// ignored, which lets vehicles stop inside the box and interlock.
bool notl_entry_rule(const World& world, const Vehicle& veh);

// granted-or-inside streams must stay pairwise conflict-free
bool grant_set_sound(const World& world);

} // namespace cxflow
