#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cxflow/vehicle.hpp"

namespace cxflow {

enum class EventType : uint8_t { Spawn, Enter, Exit, Conflict, Safety, Scenario };

struct EventRecord {
    EventType type;
    int vehicle = -1;
    int stream = -1;
    std::string tag; // scenario markers ("blackout", "rv_drop")
};

struct VehicleSnap {
    int id;
    VehicleKind kind;
    int stream;
    double s, v;
    VehicleZone zone;
    double wait_accum;
    bool controlled;
};

struct DecisionRecord {
    int vehicle;
    int stream;
    Action action;        // raw policy output, before conflict resolution
    bool front;           // nothing between it and the entrance in its lane
    bool conflict;        // conflict predicate on the raw outputs
    bool exploratory;     // action came from the epsilon branch
};

// Reward finalized one step after its decision.
struct RewardRecord {
    int vehicle;
    int decision_step;
    Action action;
    bool conflict;
    double reward;
};

struct StepRecord {
    int step = 0;
    std::vector<VehicleSnap> vehicles; // post-step state (empty in events-only logs)
    std::vector<DecisionRecord> decisions;
    std::vector<int> grants;
    std::vector<EventRecord> events;
    std::vector<RewardRecord> rewards;
};

enum class LogLevel : uint8_t { None, EventsOnly, Full };

// Append-only per-step record of a run; every metric is a pure function of it.
struct RunLog {
    LogLevel level = LogLevel::Full;
    int mode = 8;
    std::vector<StepRecord> steps;

    bool has_snapshots() const { return level == LogLevel::Full; }
};

enum class WaitMode : uint8_t { Accumulated, LongestInterval };
enum class AwtScope : uint8_t { Intersection, Direction };

struct AwtResult {
    double value = 0.0;
    bool empty_scope = false;
};

// Average waiting time over [from, to) steps. Per-vehicle waiting is the sum
// of still intervals (v < 0.1 m/s) spent in the control zone within the
// window (or the longest single interval under WaitMode::LongestInterval);
// the mean runs over vehicles present at the intersection during the window.
AwtResult awt(const RunLog& log, AwtScope scope, int direction, int from, int to,
              WaitMode mode = WaitMode::Accumulated);

// CL = min(awt / threshold, 1)
double congestion_level(double awt_value, double threshold);

// Conflicting Go decisions over total RV decisions in [from, to); nullopt
// when the window holds no decisions.
std::optional<double> conflict_rate(const RunLog& log, int from, int to);

// Least-squares slope of the series tail (trailing `window` points).
double slope_tail(const std::vector<double>& series, int window);

// Mean speed of vehicles in the control zone and interior at one step;
// nullopt when no such vehicle exists.
std::optional<double> avg_speed_at(const RunLog& log, int step);

// True when average speed stayed below 1 m/s for >= 60 consecutive steps.
bool congested(const RunLog& log, int from, int to);

// Per-step AWT series (instantaneous mean accumulated wait of present vehicles).
std::vector<double> awt_series(const RunLog& log);

inline constexpr double kCongestionSpeed = 1.0; // m/s
inline constexpr int kCongestionSteps = 60;

} // namespace cxflow
