#include "cxflow/perception.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cxflow {

// Mean wait over all control-zone vehicles of the direction, summed in id
// order so it can be reproduced exactly from logged snapshots.
double mean_zone_wait(const World& world, int slot) {
    int in_zone = 0;
    double wait_sum = 0.0;
    for (const Vehicle& v : world.vehicles()) {
        if (v.stream != slot || v.zone != VehicleZone::ControlZone) continue;
        wait_sum += v.wait_accum;
        ++in_zone;
    }
    return in_zone > 0 ? wait_sum / in_zone : 0.0;
}

StreamStats ground_truth_stream_stats(const World& world, int slot) {
    const IdmParams& p = world.idm();
    StreamStats out;
    out.avg_wait = mean_zone_wait(world, slot);

    // per lane, front to back; a vehicle is queued when still or packed
    // behind a queued leader, so queues grow contiguously from the entrance
    for (int lane = 0; lane < std::max(1, world.geo().lanes(slot)); ++lane) {
        std::vector<const Vehicle*> chain;
        for (const Vehicle& v : world.vehicles())
            if (v.stream == slot && v.lane == lane && v.zone == VehicleZone::ControlZone)
                chain.push_back(&v);
        std::sort(chain.begin(), chain.end(),
                  [](const Vehicle* a, const Vehicle* b) { return a->s > b->s; });
        bool leader_queued = false;
        double leader_rear = 0.0;
        for (size_t i = 0; i < chain.size(); ++i) {
            const Vehicle& v = *chain[i];
            bool queued = v.v < kStillSpeed;
            if (!queued && i > 0 && leader_queued)
                queued = (leader_rear - v.s) < p.s0 + 0.5;
            if (queued) out.queue_len += 1.0;
            leader_queued = queued;
            leader_rear = v.s - p.vehicle_length;
        }
    }
    return out;
}

std::vector<StreamStats> all_ground_truth_stats(const World& world) {
    std::vector<StreamStats> out(world.geo().slot_count());
    for (int j = 0; j < world.geo().slot_count(); ++j)
        if (world.geo().active(j)) out[j] = ground_truth_stream_stats(world, j);
    return out;
}

std::array<uint8_t, 10> occupancy_map(const World& world, int slot) {
    std::array<uint8_t, 10> seg{};
    double len = world.geo().active(slot) ? world.geo().path_length(slot) : 0.0;
    if (len <= 0.0) return seg;
    for (const Vehicle& v : world.vehicles()) {
        if (v.stream != slot || v.s <= 0.0 || v.s > len) continue;
        double f = v.s / len;
        int k = std::min(9, static_cast<int>(f * 10.0));
        seg[k] = 1;
    }
    return seg;
}

std::optional<std::pair<double, double>> ego_estimates(const Vehicle& veh) {
    if (veh.kind != VehicleKind::RV || veh.zone != VehicleZone::ControlZone) return std::nullopt;
    if (veh.v >= kStillSpeed) return std::nullopt;
    double d = std::max(0.0, -veh.s);
    return std::make_pair(d / 5.0, veh.wait_accum);
}

Observation encode_observation(const World& world, const Vehicle& ego,
                               const std::vector<StreamStats>& stats) {
    if (ego.zone != VehicleZone::ControlZone)
        throw std::runtime_error("encode_observation: ego outside the control zone");
    const Intersection& geo = world.geo();
    int mode = geo.mode();
    if (static_cast<int>(stats.size()) != geo.slot_count())
        throw std::runtime_error("encode_observation: stats size does not match mode");

    Observation obs;
    obs.mode = mode;
    obs.values.reserve(observation_length(mode));
    for (int j = 0; j < mode; ++j) {
        if (!geo.active(j)) {
            obs.values.push_back(0.0);
            obs.values.push_back(0.0);
            continue;
        }
        double cap = queue_capacity(geo.lanes(j));
        obs.values.push_back(stats[j].queue_len / cap);
        obs.values.push_back(stats[j].avg_wait / kWaitMax);
    }
    for (int j = 0; j < mode; ++j) {
        auto seg = geo.active(j) ? occupancy_map(world, j) : std::array<uint8_t, 10>{};
        for (uint8_t b : seg) obs.values.push_back(static_cast<double>(b));
    }
    double d = std::clamp(-ego.s, 0.0, geo.control_zone_radius());
    obs.values.push_back(d / geo.control_zone_radius());
    return obs;
}

} // namespace cxflow
