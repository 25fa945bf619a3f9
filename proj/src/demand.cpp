#include "cxflow/demand.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cxflow {

std::vector<Arrival> arrivals(const DemandProfile& profile, double horizon, Rng& rng) {
    if (horizon <= 0.0) throw std::invalid_argument("arrivals: horizon must be positive");
    std::vector<Arrival> out;
    for (size_t j = 0; j < profile.counts.size(); ++j) {
        double c = profile.counts[j];
        if (c <= 0.0) continue;
        if (profile.arrival_model == ArrivalModel::Uniform) {
            double h = 3600.0 / c;
            for (double t = h; t < horizon; t += h) out.push_back({t, static_cast<int>(j)});
        } else {
            double rate = c / 3600.0;
            double t = rng.exponential(rate);
            while (t < horizon) {
                out.push_back({t, static_cast<int>(j)});
                t += rng.exponential(rate);
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Arrival& a, const Arrival& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.stream < b.stream;
    });
    return out;
}

Spawner::Spawner(std::vector<Arrival> schedule, DemandProfile profile)
    : schedule_(std::move(schedule)), profile_(std::move(profile)) {
    backlog_.resize(profile_.counts.size());
}

long long Spawner::backlog_size() const {
    long long n = 0;
    for (const auto& q : backlog_) n += static_cast<long long>(q.size());
    return n;
}

std::vector<int> Spawner::step(World& world, Rng& kind_rng, std::vector<EventRecord>& events) {
    const double now = world.time();
    while (cursor_ < schedule_.size() && schedule_[cursor_].time <= now) {
        backlog_[schedule_[cursor_].stream].push_back(1);
        ++cursor_;
        ++released_;
    }

    std::vector<int> spawned;
    const Intersection& geo = world.geo();
    const IdmParams& p = world.idm();
    const double spawn_s = -geo.approach_length();

    for (int j = 0; j < geo.slot_count(); ++j) {
        if (backlog_[j].empty()) continue;
        if (!geo.active(j)) { backlog_[j].clear(); continue; }
        int lanes = geo.lanes(j);
        std::vector<bool> lane_used(lanes, false);
        while (!backlog_[j].empty()) {
            // least-occupied lane among unused ones; ties to the lowest index
            int best_lane = -1, best_count = 1 << 30;
            for (int l = 0; l < lanes; ++l) {
                if (lane_used[l]) continue;
                int count = 0;
                for (const Vehicle& v : world.vehicles())
                    if (v.stream == j && v.lane == l && v.s <= 0.0) ++count;
                if (count < best_count) { best_count = count; best_lane = l; }
            }
            if (best_lane < 0) break;

            // last vehicle in that lane
            double tail_s = kInfGap, tail_v = 0.0;
            for (const Vehicle& v : world.vehicles()) {
                if (v.stream != j || v.lane != best_lane || v.s > 0.0) continue;
                if (std::isinf(tail_s) || v.s < tail_s) { tail_s = v.s; tail_v = v.v; }
            }
            double gap = std::isinf(tail_s) ? kInfGap : (tail_s - p.vehicle_length) - spawn_s;
            bool ok = std::isinf(gap) ||
                      (gap > p.s0 && safe_speed_cap(p.a_max, p.v0, gap, tail_v, p) >= -p.b);
            if (!ok) {
                lane_used[best_lane] = true; // retry next step
                continue;
            }
            VehicleKind kind =
                kind_rng.bernoulli(profile_.rv_rate) ? VehicleKind::RV : VehicleKind::HV;
            int id = world.add_vehicle(j, best_lane, kind, spawn_s, p.v0);
            events.push_back({EventType::Spawn, id, j, ""});
            spawned.push_back(id);
            backlog_[j].pop_front();
            ++spawned_;
            lane_used[best_lane] = true;
        }
    }
    return spawned;
}

double geh(double M, double C) {
    if (M == 0.0 && C == 0.0) return 0.0;
    return std::sqrt(2.0 * (M - C) * (M - C) / (M + C));
}

GehReport validate_demand(const RunLog& log, const DemandProfile& profile,
                          double window, double dt) {
    if (window < 3600.0)
        throw std::invalid_argument("validate_demand: window must be >= 3600 s");
    int window_steps = static_cast<int>(window / dt);
    int total = static_cast<int>(log.steps.size());
    if (total < window_steps)
        throw std::invalid_argument("validate_demand: run shorter than the window");

    GehReport rep;
    size_t slots = profile.counts.size();
    std::vector<long long> entered(slots, 0);
    for (int i = total - window_steps; i < total; ++i)
        for (const EventRecord& e : log.steps[i].events)
            if (e.type == EventType::Enter && e.stream >= 0 &&
                e.stream < static_cast<int>(slots))
                ++entered[e.stream];

    rep.per_stream.assign(slots, 0.0);
    rep.stream_active.assign(slots, false);
    double sum = 0.0;
    int n = 0;
    for (size_t j = 0; j < slots; ++j) {
        if (profile.counts[j] <= 0.0 && entered[j] == 0) continue;
        double M = static_cast<double>(entered[j]) * 3600.0 / window;
        rep.per_stream[j] = geh(M, profile.counts[j]);
        rep.stream_active[j] = true;
        sum += rep.per_stream[j];
        ++n;
    }
    rep.mean = n > 0 ? sum / n : 0.0;
    return rep;
}

} // namespace cxflow
