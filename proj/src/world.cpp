#include "cxflow/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cxflow {

namespace {
constexpr double kStopMargin = 0.3; // halt this far before a blocked line
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

World::World(std::shared_ptr<const Intersection> geo, IdmParams idm, double dt)
    : geo_(std::move(geo)), idm_(idm), dt_(dt) {}

const Vehicle* World::find(int id) const {
    auto it = std::lower_bound(vehicles_.begin(), vehicles_.end(), id,
                               [](const Vehicle& v, int key) { return v.id < key; });
    return (it != vehicles_.end() && it->id == id) ? &*it : nullptr;
}

Vehicle* World::find(int id) {
    return const_cast<Vehicle*>(static_cast<const World*>(this)->find(id));
}

int World::add_vehicle(int stream, int lane, VehicleKind kind, double s, double v,
                       bool controlled) {
    Vehicle veh;
    veh.id = next_id_++;
    veh.kind = kind;
    veh.stream = stream;
    veh.lane = lane;
    veh.s = s;
    veh.v = v;
    veh.zone = s >= -geo_->control_zone_radius() ? VehicleZone::ControlZone : VehicleZone::Upstream;
    veh.spawn_time = time_;
    veh.controlled = controlled;
    vehicles_.push_back(veh);
    return veh.id;
}

std::pair<double, double> World::leader_gap(const Vehicle& v) const {
    const double len = idm_.vehicle_length;
    double best_s = kInf, best_v = 0.0;
    if (v.s > 0.0) {
        for (const Vehicle& o : vehicles_) {
            if (o.id == v.id || o.stream != v.stream || o.s <= 0.0) continue;
            if (o.s > v.s && o.s < best_s) { best_s = o.s; best_v = o.v; }
        }
    } else {
        for (const Vehicle& o : vehicles_) {
            if (o.id == v.id || o.stream != v.stream) continue;
            if (o.s <= 0.0) {
                if (o.lane == v.lane && o.s > v.s && o.s < best_s) { best_s = o.s; best_v = o.v; }
            } else {
                // rearmost vehicle already on the inner path
                if (o.s < best_s) { best_s = o.s; best_v = o.v; }
            }
        }
    }
    if (std::isinf(best_s)) return {kInfGap, 0.0};
    return {best_s - len - v.s, best_v};
}

bool World::zone_occupied_by_other_side(const ConflictZone& z, int own_slot,
                                        const Vehicle* ignore) const {
    int other = z.other(own_slot);
    const ZoneInterval& iv = z.on(other);
    const double len = idm_.vehicle_length;
    for (const Vehicle& o : vehicles_) {
        if (o.stream != other || (ignore && o.id == ignore->id)) continue;
        if (o.s <= 0.0) continue;
        if (o.s > iv.begin && o.s - len < iv.end) return true;
    }
    return false;
}

double World::interior_yield_position(const Vehicle& v) const {
    const double len = idm_.vehicle_length;
    double limit = geo_->path_length(v.stream);
    for (int zi : geo_->zones_on(v.stream)) {
        const ConflictZone& z = geo_->zones()[zi];
        const ZoneInterval& own = z.on(v.stream);
        if (own.end <= v.s - len) continue; // fully behind
        if (v.s > own.begin && v.s - len < own.end) continue; // already inside: priority
        if (own.begin >= v.s && zone_occupied_by_other_side(z, v.stream, &v)) {
            limit = std::min(limit, own.begin - kStopMargin);
            break; // cannot pass this zone, farther ones are unreachable
        }
    }
    return limit;
}

bool World::is_lane_front(const Vehicle& v) const {
    if (v.s > 0.0) return false;
    for (const Vehicle& o : vehicles_) {
        if (o.id == v.id || o.stream != v.stream || o.lane != v.lane) continue;
        if (o.s <= 0.0 && o.s > v.s) return false;
    }
    return true;
}

std::vector<VehicleSnap> World::snapshot() const {
    std::vector<VehicleSnap> out;
    out.reserve(vehicles_.size());
    for (const Vehicle& v : vehicles_)
        out.push_back({v.id, v.kind, v.stream, v.s, v.v, v.zone, v.wait_accum, v.controlled});
    return out;
}

StepResult World::step(const StepInput& in) {
    StepResult res;
    const double len = idm_.vehicle_length;
    const size_t n = vehicles_.size();
    const int slots = geo_->slot_count();

    // Start-of-step zone occupancy per side, and per-step claims.
    const auto& zones = geo_->zones();
    std::vector<std::array<bool, 2>> start_occ(zones.size(), {false, false});
    std::vector<std::array<bool, 2>> claim(zones.size(), {false, false});
    for (const Vehicle& v : vehicles_) {
        if (v.s <= 0.0) continue;
        for (int zi : geo_->zones_on(v.stream)) {
            const ConflictZone& z = zones[zi];
            const ZoneInterval& own = z.on(v.stream);
            if (v.s > own.begin && v.s - len < own.end)
                start_occ[zi][v.stream == z.a ? 0 : 1] = true;
        }
    }

    // Base acceleration from commands or IDM, capped against the start-state
    // leader. Vehicles not permitted to cross brake into the entrance line as
    // if a standing obstacle sat just past it.
    std::vector<double> accel(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const Vehicle& v = vehicles_[i];
        auto [gap, lv] = leader_gap(v);
        if (gap <= 0.0 && !std::isinf(gap))
            res.events.push_back({EventType::Safety, v.id, v.stream, ""});
        auto cmd = in.commands.find(v.id);
        double a = cmd != in.commands.end() ? cmd->second : idm_accel(v.v, gap, lv, idm_);
        a = safe_speed_cap(a, v.v, gap, lv, idm_, dt_);
        bool permitted = v.entry_granted || in.may_cross.count(v.id) > 0;
        if (v.s <= 0.0 && !permitted) {
            double line_gap = std::max(-v.s, 1e-9);
            a = std::min(a, idm_accel(v.v, line_gap + idm_.s0, 0.0, idm_));
            a = safe_speed_cap(a, v.v, line_gap, 0.0, idm_, dt_);
        }
        accel[i] = std::clamp(a, -idm_.b_emergency, idm_.a_max);
    }

    // Process order: vehicles on the inner path first (canonical stream,
    // descending s), then approaching vehicles per lane front-to-back.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        const Vehicle& a = vehicles_[x];
        const Vehicle& b = vehicles_[y];
        bool ea = a.s > 0.0, eb = b.s > 0.0;
        if (ea != eb) return ea;
        if (a.stream != b.stream) return a.stream < b.stream;
        if (!ea && a.lane != b.lane) return a.lane < b.lane;
        if (a.s != b.s) return a.s > b.s;
        return a.id < b.id;
    });

    // Running rear positions: the inner path per stream and each approach lane.
    std::vector<double> inner_rear(slots, kInf);
    std::map<std::pair<int, int>, double> lane_rear;

    std::vector<double> new_s(n), new_v(n);
    for (size_t oi = 0; oi < n; ++oi) {
        size_t i = order[oi];
        Vehicle& v = vehicles_[i];
        double vp = std::max(0.0, v.v + accel[i] * dt_);
        double proposed = v.s + vp * dt_;
        double s_max = kInf;
        bool entered = v.s > 0.0;

        if (entered) {
            if (!std::isinf(inner_rear[v.stream]))
                s_max = std::min(s_max, inner_rear[v.stream] - idm_.s0);
        } else {
            auto lr = lane_rear.find({v.stream, v.lane});
            if (lr != lane_rear.end()) s_max = std::min(s_max, lr->second - idm_.s0);
            bool permitted = v.entry_granted || in.may_cross.count(v.id) > 0;
            if (!permitted) {
                s_max = std::min(s_max, 0.0);
            } else if (proposed > 0.0 && !std::isinf(inner_rear[v.stream])) {
                s_max = std::min(s_max, inner_rear[v.stream] - idm_.s0);
            }
        }

        // Conflict zones ahead: stop before a blocked one; claim swept ones.
        if (entered || std::min(proposed, s_max) > 0.0) {
            for (int zi : geo_->zones_on(v.stream)) {
                const ConflictZone& z = zones[zi];
                const ZoneInterval& own = z.on(v.stream);
                int side = v.stream == z.a ? 0 : 1;
                if (own.end <= v.s - len) continue;          // passed
                if (v.s > own.begin && v.s - len < own.end) continue; // occupying: priority
                if (own.begin < v.s) continue;               // partially behind the front
                if (std::min(proposed, s_max) <= own.begin) break; // not reached this step
                if (start_occ[zi][1 - side] || claim[zi][1 - side]) {
                    s_max = std::min(s_max, own.begin - kStopMargin);
                    break;
                }
            }
        }

        double s_new = std::min(proposed, s_max);
        if (s_new < v.s) s_new = v.s; // never move backward
        double v_new = std::max(0.0, (s_new - v.s) / dt_);
        s_new = v.s + v_new * dt_;

        // register claims over the swept body interval
        if (s_new > 0.0) {
            double swept_lo = v.s - len, swept_hi = s_new;
            for (int zi : geo_->zones_on(v.stream)) {
                const ConflictZone& z = zones[zi];
                const ZoneInterval& own = z.on(v.stream);
                if (swept_hi > own.begin && swept_lo < own.end)
                    claim[zi][v.stream == z.a ? 0 : 1] = true;
            }
            inner_rear[v.stream] = std::min(inner_rear[v.stream], s_new - len);
        }
        if (!entered && s_new <= 0.0) lane_rear[{v.stream, v.lane}] = s_new - len;

        new_s[i] = s_new;
        new_v[i] = v_new;
    }

    // Commit state, zone labels, waits and events.
    const double czr = geo_->control_zone_radius();
    std::vector<int> removals;
    for (size_t i = 0; i < n; ++i) {
        Vehicle& v = vehicles_[i];
        double plen = geo_->path_length(v.stream);
        bool crossed = v.s <= 0.0 && new_s[i] > 0.0;
        bool exited = v.s < plen && new_s[i] >= plen;
        v.a = std::clamp((new_v[i] - v.v) / dt_, -idm_.b_emergency, idm_.a_max);
        v.s = new_s[i];
        v.v = new_v[i];
        if (crossed) {
            v.entry_granted = true;
            res.events.push_back({EventType::Enter, v.id, v.stream, ""});
        }
        if (exited) res.events.push_back({EventType::Exit, v.id, v.stream, ""});
        if (v.s >= plen) v.zone = VehicleZone::Exited;
        else if (v.s > 0.0) v.zone = VehicleZone::Inside;
        else if (v.s >= -czr) v.zone = VehicleZone::ControlZone;
        if (v.zone == VehicleZone::ControlZone && v.v < kStillSpeed) v.wait_accum += dt_;
        if (v.s - len >= plen) removals.push_back(static_cast<int>(i));
    }

    // End-of-step co-occupancy check; the claim logic makes this unreachable.
    for (size_t zi = 0; zi < zones.size(); ++zi) {
        const ConflictZone& z = zones[zi];
        bool occ_a = false, occ_b = false;
        for (const Vehicle& v : vehicles_) {
            if (v.s <= 0.0) continue;
            if (v.stream == z.a && v.s > z.on_a.begin && v.s - len < z.on_a.end) occ_a = true;
            if (v.stream == z.b && v.s > z.on_b.begin && v.s - len < z.on_b.end) occ_b = true;
        }
        if (occ_a && occ_b) {
            res.events.push_back({EventType::Conflict, -1, z.a, stream_name(geo_->slot(z.b).id)});
            res.conflict_occurred = true;
        }
    }

    for (auto it = removals.rbegin(); it != removals.rend(); ++it)
        vehicles_.erase(vehicles_.begin() + *it);

    ++step_;
    time_ += dt_;
    return res;
}

} // namespace cxflow
