#include "cxflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cxflow {

namespace {

constexpr double kSampleStep = 0.25;     // polyline resolution, m
constexpr double kZoneHalfWidth = 2.0;   // half vehicle length around a crossing
constexpr double kMergeZoneLen = 4.0;    // terminal zone length for merges
constexpr double kMinPathLen = 10.0;     // keeps each of 10 occupancy segments >= 1 m

Vec2 heading_of(Approach a) {
    switch (a) {
    case Approach::E: return {1.0, 0.0};
    case Approach::W: return {-1.0, 0.0};
    case Approach::N: return {0.0, 1.0};
    case Approach::S: return {0.0, -1.0};
    }
    return {};
}

Vec2 rot_left(Vec2 v) { return {-v.y, v.x}; }
Vec2 rot_right(Vec2 v) { return {v.y, -v.x}; }

Leg leg_toward(Vec2 h) {
    if (h.x > 0.5) return Leg::E;
    if (h.x < -0.5) return Leg::W;
    if (h.y > 0.5) return Leg::N;
    return Leg::S;
}

Vec2 exit_heading(Approach a, Movement m) {
    Vec2 h = heading_of(a);
    if (m == Movement::L) return rot_left(h);
    if (m == Movement::R) return rot_right(h);
    return h;
}

// Point on the box boundary where a ray along `dir` enters/leaves, at lateral
// offset `off` from the right curb of that road half.
Vec2 edge_point(Vec2 dir, double off, double side, bool entering) {
    // Position along the edge measured from the curb on the driver's right.
    Vec2 right = rot_right(dir);
    Vec2 curb, inward;
    if (entering) {
        // entering edge is the one the ray crosses first
        if (dir.x > 0.5) curb = {0.0, 0.0};
        else if (dir.x < -0.5) curb = {side, side};
        else if (dir.y > 0.5) curb = {side, 0.0};
        else curb = {0.0, side};
    } else {
        if (dir.x > 0.5) curb = {side, 0.0};
        else if (dir.x < -0.5) curb = {0.0, side};
        else if (dir.y > 0.5) curb = {side, side};
        else curb = {0.0, 0.0};
    }
    inward = right * -1.0;
    return curb + inward * off;
}

void append_segment(PathGeom& g, Vec2 from, Vec2 to) {
    double len = (to - from).norm();
    if (len < 1e-9) return;
    int n = std::max(1, static_cast<int>(std::ceil(len / kSampleStep)));
    for (int i = 1; i <= n; ++i) {
        double t = static_cast<double>(i) / n;
        g.pts.push_back({from.x + (to.x - from.x) * t, from.y + (to.y - from.y) * t});
    }
}

void append_arc(PathGeom& g, Vec2 center, double r, double a0, double a1) {
    double len = std::abs(a1 - a0) * r;
    int n = std::max(2, static_cast<int>(std::ceil(len / kSampleStep)));
    for (int i = 1; i <= n; ++i) {
        double a = a0 + (a1 - a0) * static_cast<double>(i) / n;
        g.pts.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
    }
}

void finalize(PathGeom& g) {
    g.cum.assign(g.pts.size(), 0.0);
    for (size_t i = 1; i < g.pts.size(); ++i)
        g.cum[i] = g.cum[i - 1] + (g.pts[i] - g.pts[i - 1]).norm();
    g.length = g.cum.empty() ? 0.0 : g.cum.back();
}

// Segment-segment intersection. Endpoints count: crossings of straight paths
// land exactly on shared sample points, and the caller clusters duplicates
// reported by adjacent subsegments.
bool segment_cross(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2, double& t, double& u) {
    Vec2 r = p2 - p1, s = q2 - q1;
    double denom = r.x * s.y - r.y * s.x;
    if (std::abs(denom) < 1e-12) return false;
    Vec2 d = q1 - p1;
    t = (d.x * s.y - d.y * s.x) / denom;
    u = (d.x * r.y - d.y * r.x) / denom;
    return t >= -1e-9 && t <= 1.0 + 1e-9 && u >= -1e-9 && u <= 1.0 + 1e-9;
}

} // namespace

double Vec2::norm() const { return std::sqrt(x * x + y * y); }

Vec2 PathGeom::point_at(double s) const {
    if (pts.empty()) return {};
    s = std::clamp(s, 0.0, length);
    auto it = std::lower_bound(cum.begin(), cum.end(), s);
    size_t i = static_cast<size_t>(it - cum.begin());
    if (i == 0) return pts.front();
    double seg = cum[i] - cum[i - 1];
    double t = seg > 1e-12 ? (s - cum[i - 1]) / seg : 0.0;
    return {pts[i - 1].x + (pts[i].x - pts[i - 1].x) * t,
            pts[i - 1].y + (pts[i].y - pts[i - 1].y) * t};
}

std::vector<std::pair<std::string, std::string>> Intersection::conflict_free_pairs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (int a = 0; a < slot_count(); ++a) {
        if (!active(a)) continue;
        for (int b = a + 1; b < slot_count(); ++b) {
            if (!active(b)) continue;
            if (!conflicting(a, b))
                out.emplace_back(stream_name(streams_[a].id), stream_name(streams_[b].id));
        }
    }
    return out;
}

Vec2 Intersection::position_of(int slot, int lane, double s) const {
    const StreamGeom& g = streams_[slot];
    if (s > 0.0) return g.path.point_at(s);
    Vec2 right = rot_right(g.entry_dir);
    double lat = (lane - (g.lanes - 1) * 0.5) * lane_width_;
    Vec2 base = g.entry_pt + g.entry_dir * s;
    return base + right * lat;
}

Intersection build_intersection(const IntersectionSpec& spec) {
    if (spec.mode != 8 && spec.mode != 12)
        throw std::invalid_argument("IntersectionSpec.mode: must be 8 or 12");
    if (spec.approach_length <= 0.0)
        throw std::invalid_argument("IntersectionSpec.approach_length: must be positive");
    if (spec.control_zone_radius <= 0.0)
        throw std::invalid_argument("IntersectionSpec.control_zone_radius: must be positive");
    if (spec.lane_width <= 0.0)
        throw std::invalid_argument("IntersectionSpec.lane_width: must be positive");
    int legs_present = 0;
    for (bool l : spec.legs) legs_present += l ? 1 : 0;
    if (legs_present < 3)
        throw std::invalid_argument("IntersectionSpec.legs: need 3 or 4 legs");

    const auto& order = canonical_streams(spec.mode);
    Intersection out;
    out.mode_ = spec.mode;
    out.czr_ = spec.control_zone_radius;
    out.approach_len_ = spec.approach_length;
    out.lane_width_ = spec.lane_width;
    out.streams_.resize(order.size());

    auto lanes_of = [&](StreamId id) {
        auto it = spec.lanes_override.find(stream_name(id));
        return it != spec.lanes_override.end() ? it->second : spec.lanes_per_movement;
    };

    // Movements from right curb to centerline: R (12-direction only), C, L.
    std::vector<Movement> curb_order;
    if (spec.mode == 12) curb_order = {Movement::R, Movement::C, Movement::L};
    else curb_order = {Movement::C, Movement::L};

    double max_half = 0.0;
    int total_lanes = 0;
    for (Approach a : kApproaches) {
        double w = 0.0;
        for (Movement m : curb_order) {
            int k = lanes_of({a, m});
            if (k < 0) throw std::invalid_argument("IntersectionSpec.lanes_per_movement: negative");
            w += k * spec.lane_width;
            total_lanes += k;
        }
        max_half = std::max(max_half, w);
    }
    if (total_lanes == 0)
        throw std::invalid_argument("IntersectionSpec.lanes_per_movement: zero lanes everywhere");

    double side = spec.box_side > 0.0 ? spec.box_side : 2.0 * max_half;
    if (side <= 0.0) throw std::invalid_argument("IntersectionSpec.box_side: must be positive");
    out.side_ = side;

    auto half_width = [&](Approach a) {
        double w = 0.0;
        for (Movement m : curb_order) w += lanes_of({a, m}) * spec.lane_width;
        return w;
    };
    // The approach whose inbound lanes occupy the given leg.
    auto inbound_approach = [](Leg l) {
        switch (l) {
        case Leg::N: return Approach::S;
        case Leg::E: return Approach::W;
        case Leg::S: return Approach::N;
        case Leg::W: return Approach::E;
        }
        return Approach::E;
    };

    for (size_t j = 0; j < order.size(); ++j) {
        StreamGeom& sg = out.streams_[j];
        sg.id = order[j];
        sg.lanes = lanes_of(sg.id);
        Vec2 h = heading_of(sg.id.approach);
        Vec2 g = exit_heading(sg.id.approach, sg.id.movement);
        sg.origin = leg_toward(h * -1.0);
        sg.receiving = leg_toward(g);
        sg.entry_dir = h;
        bool legs_ok = spec.legs[static_cast<int>(sg.origin)] &&
                       spec.legs[static_cast<int>(sg.receiving)];
        sg.active = legs_ok && sg.lanes > 0;
        if (!sg.active) continue;

        // Entry offset: movements to the right of this one, plus half its group.
        double off = 0.0;
        for (Movement m : curb_order) {
            int k = lanes_of({sg.id.approach, m});
            if (m == sg.id.movement) {
                off += 0.5 * k * spec.lane_width;
                break;
            }
            off += k * spec.lane_width;
        }
        sg.entry_pt = edge_point(h, off, side, true);

        PathGeom path;
        path.pts.push_back(sg.entry_pt);
        if (sg.id.movement == Movement::C) {
            Vec2 exit_pt = edge_point(g, off, side, false);
            append_segment(path, sg.entry_pt, exit_pt);
        } else {
            // Turns exit into the lane nearest the centerline of the
            // receiving road, which keeps every inner path above the
            // 10 m occupancy floor.
            double w_out = half_width(inbound_approach(sg.receiving));
            double exit_off = w_out - 0.5 * spec.lane_width;
            Vec2 exit_pt = edge_point(g, exit_off, side, false);
            Vec2 corner = (std::abs(h.x) > 0.5) ? Vec2{exit_pt.x, sg.entry_pt.y}
                                                : Vec2{sg.entry_pt.x, exit_pt.y};
            double entry_leg = (corner - sg.entry_pt).norm();
            double exit_leg = (exit_pt - corner).norm();
            double r = std::min(entry_leg, exit_leg);
            Vec2 turn_start = corner - h * r;
            Vec2 turn_end = corner + g * r;
            bool left = (h.x * g.y - h.y * g.x) > 0.0;
            Vec2 center = turn_start + (left ? rot_left(h) : rot_right(h)) * r;
            append_segment(path, sg.entry_pt, turn_start);
            double a0 = std::atan2(turn_start.y - center.y, turn_start.x - center.x);
            double a1 = std::atan2(turn_end.y - center.y, turn_end.x - center.x);
            if (left && a1 < a0) a1 += 2.0 * M_PI;
            if (!left && a1 > a0) a1 -= 2.0 * M_PI;
            append_arc(path, center, r, a0, a1);
            append_segment(path, turn_end, exit_pt);
        }
        finalize(path);

        auto ov = spec.inner_path_length.find(stream_name(sg.id));
        if (ov != spec.inner_path_length.end()) {
            if (ov->second < kMinPathLen)
                throw std::invalid_argument("IntersectionSpec.inner_path_length[" +
                                            stream_name(sg.id) + "]: must be >= 10 m");
            if (ov->second < path.length - 1e-9)
                throw std::invalid_argument("IntersectionSpec.inner_path_length[" +
                                            stream_name(sg.id) +
                                            "]: shorter than geometric minimum");
            // extend the exit stub
            Vec2 tail_dir = exit_heading(sg.id.approach, sg.id.movement);
            Vec2 end = path.pts.back();
            append_segment(path, end, end + tail_dir * (ov->second - path.length));
            finalize(path);
        }
        if (path.length < kMinPathLen)
            throw std::invalid_argument("IntersectionSpec: inner path for " +
                                        stream_name(sg.id) + " is shorter than 10 m");
        sg.path = path;
    }

    // Explicit zone overrides must be symmetric.
    for (const auto& [key, iv] : spec.conflict_zone_geometry) {
        auto mirror = spec.conflict_zone_geometry.find({key.second, key.first});
        if (mirror == spec.conflict_zone_geometry.end())
            throw std::invalid_argument("IntersectionSpec.conflict_zone_geometry: pair (" +
                                        key.first + "," + key.second + ") lacks its mirror");
        if (iv.begin < 0.0 || iv.end <= iv.begin)
            throw std::invalid_argument("IntersectionSpec.conflict_zone_geometry: bad interval for (" +
                                        key.first + "," + key.second + ")");
    }

    // Derive conflict zones per active pair.
    for (int a = 0; a < out.slot_count(); ++a) {
        if (!out.streams_[a].active) continue;
        for (int b = a + 1; b < out.slot_count(); ++b) {
            if (!out.streams_[b].active) continue;
            const StreamGeom& ga = out.streams_[a];
            const StreamGeom& gb = out.streams_[b];

            auto ovr = spec.conflict_zone_geometry.find(
                {stream_name(ga.id), stream_name(gb.id)});
            if (ovr != spec.conflict_zone_geometry.end()) {
                const ZoneInterval& ia = ovr->second;
                const ZoneInterval& ib =
                    spec.conflict_zone_geometry.at({stream_name(gb.id), stream_name(ga.id)});
                out.zones_.push_back({a, b, ia, ib, false});
                continue;
            }

            std::vector<std::pair<double, double>> hits;
            for (size_t i = 1; i < ga.path.pts.size(); ++i) {
                for (size_t k = 1; k < gb.path.pts.size(); ++k) {
                    double t, u;
                    if (segment_cross(ga.path.pts[i - 1], ga.path.pts[i],
                                      gb.path.pts[k - 1], gb.path.pts[k], t, u)) {
                        double sa = ga.path.cum[i - 1] +
                                    t * (ga.path.cum[i] - ga.path.cum[i - 1]);
                        double sb = gb.path.cum[k - 1] +
                                    u * (gb.path.cum[k] - gb.path.cum[k - 1]);
                        hits.emplace_back(sa, sb);
                    }
                }
            }
            // cluster crossings closer than one zone width into one zone
            std::sort(hits.begin(), hits.end());
            for (size_t i = 0; i < hits.size();) {
                size_t k = i + 1;
                while (k < hits.size() && hits[k].first - hits[k - 1].first < 2.0 * kZoneHalfWidth)
                    ++k;
                double sa = 0.0, sb = 0.0;
                for (size_t m = i; m < k; ++m) { sa += hits[m].first; sb += hits[m].second; }
                sa /= static_cast<double>(k - i);
                sb /= static_cast<double>(k - i);
                ConflictZone z;
                z.a = a; z.b = b;
                z.on_a = {std::max(0.0, sa - kZoneHalfWidth),
                          std::min(ga.path.length, sa + kZoneHalfWidth)};
                z.on_b = {std::max(0.0, sb - kZoneHalfWidth),
                          std::min(gb.path.length, sb + kZoneHalfWidth)};
                out.zones_.push_back(z);
                i = k;
            }
            // Streams discharging into the same leg conflict where they merge,
            // even when the drawn paths stay laterally separated.
            if (ga.receiving == gb.receiving) {
                ConflictZone z;
                z.a = a; z.b = b;
                z.on_a = {std::max(0.0, ga.path.length - kMergeZoneLen), ga.path.length};
                z.on_b = {std::max(0.0, gb.path.length - kMergeZoneLen), gb.path.length};
                z.merge = true;
                out.zones_.push_back(z);
            }
        }
    }

    out.zones_by_slot_.assign(out.slot_count(), {});
    for (size_t i = 0; i < out.zones_.size(); ++i) {
        const ConflictZone& z = out.zones_[i];
        out.conflict_mask_[z.a] |= 1u << z.b;
        out.conflict_mask_[z.b] |= 1u << z.a;
        out.zones_by_slot_[z.a].push_back(static_cast<int>(i));
        out.zones_by_slot_[z.b].push_back(static_cast<int>(i));
    }
    for (int j = 0; j < out.slot_count(); ++j) {
        auto& list = out.zones_by_slot_[j];
        std::sort(list.begin(), list.end(), [&](int x, int y) {
            return out.zones_[x].on(j).begin < out.zones_[y].on(j).begin;
        });
    }
    return out;
}

} // namespace cxflow
