#include "cxflow/comms.hpp"

#include <algorithm>
#include <cmath>

namespace cxflow {

namespace {

std::vector<const Vehicle*> zone_rvs(const World& world) {
    std::vector<const Vehicle*> out;
    for (const Vehicle& v : world.vehicles())
        if (v.is_controlled_rv() && v.zone == VehicleZone::ControlZone)
            out.push_back(&v);
    return out;
}

double dist2d(Vec2 a, Vec2 b) { return (a - b).norm(); }

} // namespace

LinkTable build_links(const World& world, const CommConfig& cfg) {
    LinkTable links;
    auto rvs = zone_rvs(world);
    const Intersection& geo = world.geo();

    if (cfg.protocol == CommProtocol::LongRange) {
        Vec2 c = geo.center();
        for (const Vehicle* a : rvs) {
            Vec2 pa = geo.position_of(a->stream, a->lane, a->s);
            if (dist2d(pa, c) > cfg.long_range_radius) continue;
            for (const Vehicle* b : rvs) {
                if (a->id == b->id) continue;
                Vec2 pb = geo.position_of(b->stream, b->lane, b->s);
                if (dist2d(pb, c) > cfg.long_range_radius) continue;
                links[{a->id, b->id}] = 1;
            }
        }
        return links;
    }

    // Short range: clusters per direction, the leading in-zone RV is master.
    std::map<int, const Vehicle*> master;
    for (const Vehicle* v : rvs) {
        auto it = master.find(v->stream);
        if (it == master.end() || v->s > it->second->s) master[v->stream] = v;
    }
    auto pos_of = [&](const Vehicle* v) { return geo.position_of(v->stream, v->lane, v->s); };

    for (const Vehicle* a : rvs) {
        const Vehicle* ma = master[a->stream];
        for (const Vehicle* b : rvs) {
            if (a->id == b->id) continue;
            const Vehicle* mb = master[b->stream];
            int hops = 0;
            bool ok = true;
            if (a->id != ma->id) {
                ok = dist2d(pos_of(a), pos_of(ma)) <= cfg.hop_range;
                ++hops;
            }
            if (ok && ma->id != mb->id) {
                ok = dist2d(pos_of(ma), pos_of(mb)) <= cfg.hop_range;
                ++hops;
            }
            if (ok && b->id != mb->id) {
                ok = dist2d(pos_of(mb), pos_of(b)) <= cfg.hop_range;
                ++hops;
            }
            if (ok && hops > 0 && hops <= cfg.max_hops) links[{a->id, b->id}] = hops;
        }
    }
    return links;
}

std::vector<CommMessage> collect_messages(const World& world) {
    std::vector<CommMessage> out;
    for (const Vehicle& v : world.vehicles()) {
        if (!v.is_controlled_rv()) continue;
        auto est = ego_estimates(v);
        if (!est) continue;
        out.push_back({v.id, v.stream, std::max(0.0, -v.s), est->second, est->first});
    }
    return out;
}

std::map<int, std::vector<CommMessage>> deliver(const std::vector<CommMessage>& messages,
                                                const std::vector<int>& receivers,
                                                const LinkTable& links, double per, Rng& rng) {
    std::map<int, std::vector<CommMessage>> out;
    for (int r : receivers) out[r] = {};
    for (int r : receivers) {
        for (const CommMessage& m : messages) {
            if (m.sender == r) {
                out[r].push_back(m); // own state, no radio involved
                continue;
            }
            auto it = links.find({m.sender, r});
            if (it == links.end()) continue;
            double p_info = std::pow(1.0 - per, it->second);
            if (rng.uniform() < p_info) out[r].push_back(m);
        }
    }
    return out;
}

std::vector<StreamStats> aggregate_estimates(const std::vector<CommMessage>& received,
                                             int slots) {
    std::vector<StreamStats> out(slots);
    std::vector<int> n(slots, 0);
    std::vector<double> wsum(slots, 0.0);
    for (const CommMessage& m : received) {
        if (m.stream < 0 || m.stream >= slots) continue;
        out[m.stream].queue_len = std::max(out[m.stream].queue_len, m.ego_l);
        wsum[m.stream] += m.ego_w;
        ++n[m.stream];
    }
    for (int j = 0; j < slots; ++j)
        if (n[j] > 0) out[j].avg_wait = wsum[j] / n[j];
    return out;
}

std::optional<double> estimation_error(double actual, double estimated) {
    if (actual == 0.0 && estimated == 0.0) return 0.0;
    if (actual == 0.0) return std::nullopt;
    return std::abs(actual - estimated) / std::abs(actual) * 100.0;
}

} // namespace cxflow
