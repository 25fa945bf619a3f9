#include "cxflow/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cxflow {

double PhasePlan::cycle() const {
    double c = 0.0;
    for (const Phase& p : phases) c += p.green + p.yellow + p.all_red;
    return c;
}

void PhasePlan::validate(const Intersection& geo) const {
    if (phases.empty()) throw std::invalid_argument("PhasePlan: no phases");
    for (const Phase& p : phases) {
        if (p.green <= 0.0 || p.yellow < 0.0 || p.all_red < 0.0)
            throw std::invalid_argument("PhasePlan: bad phase timing");
        for (int a = 0; a < geo.slot_count(); ++a) {
            if (!(p.green_mask >> a & 1u)) continue;
            for (int b = a + 1; b < geo.slot_count(); ++b) {
                if (!(p.green_mask >> b & 1u)) continue;
                if (geo.conflicting(a, b))
                    throw std::invalid_argument("PhasePlan: conflicting streams " +
                                                stream_name(geo.slot(a).id) + " and " +
                                                stream_name(geo.slot(b).id) +
                                                " share a green phase");
            }
        }
    }
}

PhasePlan default_phase_plan(const Intersection& geo) {
    auto idx = [&](Approach a, Movement m) { return canonical_index({a, m}, geo.mode()); };
    std::vector<uint32_t> masks = {
        (1u << idx(Approach::N, Movement::C)) | (1u << idx(Approach::S, Movement::C)),
        (1u << idx(Approach::N, Movement::L)) | (1u << idx(Approach::S, Movement::L)),
        (1u << idx(Approach::E, Movement::C)) | (1u << idx(Approach::W, Movement::C)),
        (1u << idx(Approach::E, Movement::L)) | (1u << idx(Approach::W, Movement::L)),
    };
    if (geo.mode() == 12) {
        // attach each right turn to the first phase it does not conflict with
        for (Approach a : kApproaches) {
            int r = idx(a, Movement::R);
            if (!geo.active(r)) continue;
            for (uint32_t& mask : masks) {
                bool ok = true;
                for (int b = 0; b < geo.slot_count(); ++b)
                    if ((mask >> b & 1u) && geo.conflicting(r, b)) { ok = false; break; }
                if (ok) { mask |= 1u << r; break; }
            }
        }
    }
    PhasePlan plan;
    for (uint32_t m : masks) plan.phases.push_back({m, 30.0, 3.0, 2.0});
    plan.validate(geo);
    return plan;
}

uint32_t tl_controller(const PhasePlan& plan, const Intersection& geo, double t) {
    double c = plan.cycle();
    double u = std::fmod(t, c);
    if (u < 0.0) u += c;
    for (const Phase& p : plan.phases) {
        if (u < p.green) {
            // runtime guard mirroring the validate() invariant
            for (int a = 0; a < geo.slot_count(); ++a)
                for (int b = a + 1; b < geo.slot_count(); ++b)
                    if ((p.green_mask >> a & 1u) && (p.green_mask >> b & 1u) &&
                        geo.conflicting(a, b))
                        throw std::logic_error("tl_controller: conflicting green set");
            return p.green_mask;
        }
        u -= p.green;
        if (u < p.yellow + p.all_red) return 0;
        u -= p.yellow + p.all_red;
    }
    return 0;
}

double actuation(Action action, const Vehicle& veh, const World& world) {
    const IdmParams& p = world.idm();
    if (action == Action::Go) return p.a_max;
    if (veh.v < kStillSpeed) return 0.0;
    double d_front = -veh.s; // distance to the entrance line
    auto [gap, lv] = world.leader_gap(veh);
    (void)lv;
    if (!std::isinf(gap)) d_front = std::min(d_front, gap);
    if (d_front <= 0.0) return -p.b_emergency;
    return std::max(-p.b_emergency, -(veh.v * veh.v) / (2.0 * d_front));
}

double priority_score(double queue_len, double avg_wait, int lanes) {
    double cap = queue_capacity(lanes);
    double w_term = std::min(avg_wait, kWaitMax) / kWaitMax;
    double l_term = std::min(queue_len, cap) / cap;
    return 0.5 * (w_term + l_term);
}

std::vector<int> resolve_conflicts(World& world, const std::vector<Decision>& decisions,
                                   const std::vector<StreamStats>& stats) {
    const Intersection& geo = world.geo();

    // streams already inside the box or committed to enter it
    uint32_t occupied = 0;
    for (const Vehicle& v : world.vehicles())
        if (v.zone == VehicleZone::Inside || (v.entry_granted && v.zone != VehicleZone::Exited))
            occupied |= 1u << v.stream;

    struct Candidate {
        int vehicle;
        int stream;
        double score;
    };
    std::vector<Candidate> cands;
    for (const Decision& d : decisions) {
        if (!d.front || d.action != Action::Go) continue;
        const Vehicle* v = world.find(d.vehicle);
        if (!v || v->entry_granted || std::abs(v->s) >= 0.5) continue;
        cands.push_back({d.vehicle, d.stream,
                         priority_score(stats[d.stream].queue_len, stats[d.stream].avg_wait,
                                        geo.lanes(d.stream))});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.stream != b.stream) return a.stream < b.stream;
        return a.vehicle < b.vehicle;
    });

    std::vector<int> granted;
    uint32_t blocked_streams = occupied;
    for (const Candidate& c : cands) {
        if (geo.conflict_mask(c.stream) & blocked_streams) continue;
        Vehicle* v = world.find(c.vehicle);
        v->entry_granted = true;
        granted.push_back(c.vehicle);
        blocked_streams |= 1u << c.stream;
    }
    return granted;
}

bool notl_entry_rule(const World& world, const Vehicle& veh) {
    const Intersection& geo = world.geo();
    const auto& zone_ids = geo.zones_on(veh.stream);
    if (zone_ids.empty()) return true;
    // first zone along the path
    int first = zone_ids.front();
    const ConflictZone& z = geo.zones()[first];
    int other = z.other(veh.stream);
    const ZoneInterval& iv = z.on(other);
    const double len = world.idm().vehicle_length;
    for (const Vehicle& o : world.vehicles()) {
        if (o.stream != other || o.s <= 0.0) continue;
        if (o.s > iv.begin && o.s - len < iv.end) return false;
    }
    return true;
}

bool grant_set_sound(const World& world) {
    uint32_t occupied = 0;
    const Intersection& geo = world.geo();
    for (const Vehicle& v : world.vehicles())
        if (v.zone == VehicleZone::Inside || (v.entry_granted && v.zone != VehicleZone::Exited))
            occupied |= 1u << v.stream;
    for (int a = 0; a < geo.slot_count(); ++a)
        for (int b = a + 1; b < geo.slot_count(); ++b)
            if ((occupied >> a & 1u) && (occupied >> b & 1u) && geo.conflicting(a, b))
                return false;
    return true;
}

} // namespace cxflow
