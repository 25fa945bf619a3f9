#pragma once

#include <deque>
#include <vector>

#include "cxflow/metrics.hpp"
#include "cxflow/rng.hpp"
#include "cxflow/world.hpp"

namespace cxflow {

enum class ArrivalModel : uint8_t { Poisson, Uniform };

struct DemandProfile {
    ArrivalModel arrival_model = ArrivalModel::Poisson;
    std::vector<double> counts; // vehicles/hour per canonical slot
    double rv_rate = 1.0;
};

struct Arrival {
    double time;
    int stream;
};

// Arrival schedule over [0, horizon): exponential inter-arrival times at rate
// count/3600 per stream under Poisson, fixed headways of 3600/count under
// Uniform. Sorted by time.
std::vector<Arrival> arrivals(const DemandProfile& profile, double horizon, Rng& rng);

// Injects due arrivals into the world. An arrival spawns at the upstream end
// of the least-occupied lane of its stream at speed v0 when the insertion gap
// allows a collision-free next step; otherwise it stays backlogged and is
// retried every step, so demand is conserved.
class Spawner {
public:
    Spawner(std::vector<Arrival> schedule, DemandProfile profile);

    // Returns spawned vehicle ids (in spawn order); appends Spawn events.
    std::vector<int> step(World& world, Rng& kind_rng, std::vector<EventRecord>& events);

    long long scheduled_so_far() const { return released_; }
    long long spawned_total() const { return spawned_; }
    long long backlog_size() const;

private:
    std::vector<Arrival> schedule_;
    DemandProfile profile_;
    size_t cursor_ = 0;
    std::vector<std::deque<char>> backlog_; // per slot, entries are pending arrivals
    long long released_ = 0;
    long long spawned_ = 0;
};

// GEH flow-similarity statistic between simulated count M and observed count
// C (both in vehicles/hour over the same window). Defined as 0 when both are 0.
double geh(double M, double C);

struct GehReport {
    std::vector<double> per_stream; // indexed by canonical slot (active slots only meaningful)
    std::vector<bool> stream_active;
    double mean = 0.0;
};

// Counts Enter events per stream over the trailing `window` seconds of the
// log, scales to vehicles/hour and compares with the configured counts.
// Throws if the run is shorter than the window (window >= 3600 s).
GehReport validate_demand(const RunLog& log, const DemandProfile& profile,
                          double window, double dt = 1.0);

} // namespace cxflow
