#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cxflow/world.hpp"

namespace cxflow {

inline constexpr double kWaitMax = 200.0; // s, observation/reward normalizer

// Queue capacity of a direction's control zone: one 5 m footprint per lane
// per 5 m of zone.
inline double queue_capacity(int lanes) { return 6.0 * lanes; }

struct StreamStats {
    double queue_len = 0.0; // vehicles
    double avg_wait = 0.0;  // s
};

// Fixed-length policy input: per direction (queue length, waiting time) then
// per direction 10 occupancy flags, then the ego distance. 12J+1 entries.
struct Observation {
    std::vector<double> values;
    int mode = 8;
};

inline int observation_length(int mode) { return 12 * mode + 1; }

// Queue length = vehicles in the control zone that are still (< 0.1 m/s) or
// blocked behind a still vehicle; waiting time = mean accumulated wait over
// all control-zone vehicles of the direction.
StreamStats ground_truth_stream_stats(const World& world, int slot);

std::vector<StreamStats> all_ground_truth_stats(const World& world);

// Segment k is set when some vehicle on the inner path has its front at
// fraction [k/10, (k+1)/10) of the path (fraction 1.0 maps to segment 9).
std::array<uint8_t, 10> occupancy_map(const World& world, int slot);

// Broadcast payload of a stopped in-zone RV: queue length estimated from its
// own distance (d / 5 m) and its accumulated wait. Empty for moving vehicles
// or vehicles outside the control zone.
std::optional<std::pair<double, double>> ego_estimates(const Vehicle& veh);

// Encodes the observation for an RV in the control zone from the supplied
// per-direction stats (ground truth or V2V-aggregated). Occupancy maps always
// come from local perception; inactive directions stay zero. Throws when the
// ego is outside the control zone.
Observation encode_observation(const World& world, const Vehicle& ego,
                               const std::vector<StreamStats>& stats);

} // namespace cxflow
