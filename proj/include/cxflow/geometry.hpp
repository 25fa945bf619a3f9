#pragma once

#include <array>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "cxflow/stream.hpp"

namespace cxflow {

struct Vec2 {
    double x = 0.0, y = 0.0;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    double norm() const;
};

// Compass side of the intersection box (a road leg).
enum class Leg : uint8_t { N = 0, E = 1, S = 2, W = 3 };

// Inner path through the box as a polyline with arc-length parameterization.
struct PathGeom {
    std::vector<Vec2> pts;
    std::vector<double> cum; // cumulative length at each point
    double length = 0.0;

    Vec2 point_at(double s) const; // clamped to [0, length]
};

struct ZoneInterval {
    double begin = 0.0, end = 0.0;
};

// Conflict zone between two streams: the interval each path sweeps through
// the shared region. merge marks end-of-path zones from a shared receiving
// leg rather than a transversal crossing.
struct ConflictZone {
    int a = 0, b = 0; // canonical slots, a < b
    ZoneInterval on_a, on_b;
    bool merge = false;

    const ZoneInterval& on(int slot) const { return slot == a ? on_a : on_b; }
    int other(int slot) const { return slot == a ? b : a; }
};

struct IntersectionSpec {
    int mode = 8;                                  // 8 or 12 controlled directions
    std::array<bool, 4> legs = {true, true, true, true}; // indexed by Leg
    int lanes_per_movement = 1;
    std::map<std::string, int> lanes_override;     // per stream name, e.g. "E-C"
    double approach_length = 100.0;                // m
    double control_zone_radius = 30.0;             // m
    double lane_width = 4.0;                       // m
    double box_side = 0.0;                         // 0 = derived from lanes
    // Optional per-stream inner path length. Values must be >= 10 m and not
    // shorter than the geometric minimum; longer values extend the exit stub.
    std::map<std::string, double> inner_path_length;
    // Optional explicit conflict zones per ordered stream-name pair. When a
    // pair appears, its mirrored entry must too, and it replaces the derived
    // zones for that pair.
    std::map<std::pair<std::string, std::string>, ZoneInterval> conflict_zone_geometry;
};

struct StreamGeom {
    StreamId id{};
    bool active = false;
    int lanes = 0;
    Leg origin = Leg::N, receiving = Leg::N;
    Vec2 entry_pt, entry_dir; // entry_dir is the unit approach heading
    PathGeom path;
};

class Intersection {
public:
    int mode() const { return mode_; }
    int slot_count() const { return static_cast<int>(streams_.size()); }
    const StreamGeom& slot(int j) const { return streams_[j]; }
    bool active(int j) const { return streams_[j].active; }
    int lanes(int j) const { return streams_[j].lanes; }
    double path_length(int j) const { return streams_[j].path.length; }

    bool conflicting(int a, int b) const { return (conflict_mask_[a] >> b) & 1u; }
    uint32_t conflict_mask(int j) const { return conflict_mask_[j]; }
    const std::vector<ConflictZone>& zones() const { return zones_; }
    // Indices into zones() touching slot j, ordered by the interval start on j.
    const std::vector<int>& zones_on(int j) const { return zones_by_slot_[j]; }

    // Unordered conflict-free pairs over active streams, as stream names.
    std::vector<std::pair<std::string, std::string>> conflict_free_pairs() const;

    double control_zone_radius() const { return czr_; }
    double approach_length() const { return approach_len_; }
    double box_side() const { return side_; }
    Vec2 center() const { return {side_ / 2.0, side_ / 2.0}; }

    // World position of a vehicle front at route position s (s <= 0 upstream
    // on its approach lane, s > 0 along the inner path).
    Vec2 position_of(int slot, int lane, double s) const;

    friend Intersection build_intersection(const IntersectionSpec& spec);

private:
    int mode_ = 8;
    double side_ = 0.0, czr_ = 30.0, approach_len_ = 100.0, lane_width_ = 4.0;
    std::vector<StreamGeom> streams_;
    std::vector<ConflictZone> zones_;
    std::vector<std::vector<int>> zones_by_slot_;
    std::array<uint32_t, 12> conflict_mask_{};
};

// Builds the intersection geometry: one inner path per active stream,
// conflict zones from transversal path crossings plus shared-receiving-leg
// merges, and the conflict table derived from zone existence.
// Throws std::invalid_argument naming the offending field on a bad spec.
Intersection build_intersection(const IntersectionSpec& spec);

} // namespace cxflow
