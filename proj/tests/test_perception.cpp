#include <doctest.h>

#include <memory>

#include "cxflow/perception.hpp"

using namespace cxflow;

namespace {

std::shared_ptr<const Intersection> canonical_geo(int mode = 8) {
    IntersectionSpec spec;
    spec.mode = mode;
    return std::make_shared<const Intersection>(build_intersection(spec));
}

} // namespace

TEST_CASE("stream stats: empty direction reports zeros") {
    World w(canonical_geo());
    StreamStats st = ground_truth_stream_stats(w, 1);
    CHECK(st.queue_len == 0.0);
    CHECK(st.avg_wait == 0.0);
}

TEST_CASE("stream stats: stopped vehicles count and waits average") {
    World w(canonical_geo());
    // three stopped vehicles with accumulated waits 10, 20, 30
    double waits[3] = {10.0, 20.0, 30.0};
    double s = -1.0;
    for (double wait : waits) {
        int id = w.add_vehicle(1, 0, VehicleKind::HV, s, 0.0);
        Vehicle* v = w.find(id);
        v->zone = VehicleZone::ControlZone;
        v->wait_accum = wait;
        s -= 5.0;
    }
    StreamStats st = ground_truth_stream_stats(w, 1);
    CHECK(st.queue_len == doctest::Approx(3.0));
    CHECK(st.avg_wait == doctest::Approx(20.0));
}

TEST_CASE("stream stats: a cruising vehicle forms no queue") {
    World w(canonical_geo());
    int id = w.add_vehicle(1, 0, VehicleKind::HV, -20.0, w.idm().v0);
    w.find(id)->zone = VehicleZone::ControlZone;
    StreamStats st = ground_truth_stream_stats(w, 1);
    CHECK(st.queue_len == 0.0);
    CHECK(st.avg_wait == 0.0);
}

TEST_CASE("stream stats: a creeping follower packed behind a still leader is queued") {
    World w(canonical_geo());
    int leader = w.add_vehicle(1, 0, VehicleKind::HV, -0.5, 0.0);
    w.find(leader)->zone = VehicleZone::ControlZone;
    int follower = w.add_vehicle(1, 0, VehicleKind::HV, -5.8, 0.3); // gap 1.3 < s0+0.5
    w.find(follower)->zone = VehicleZone::ControlZone;
    StreamStats st = ground_truth_stream_stats(w, 1);
    CHECK(st.queue_len == doctest::Approx(2.0));
}

TEST_CASE("occupancy map flags the segment under each vehicle front") {
    World w(canonical_geo());
    double len = w.geo().path_length(1);
    SUBCASE("empty interior is all zeros") {
        auto seg = occupancy_map(w, 1);
        for (uint8_t b : seg) CHECK(b == 0);
    }
    SUBCASE("a vehicle at 55% of the path sets exactly segment 5") {
        int id = w.add_vehicle(1, 0, VehicleKind::HV, 0.55 * len, 5.0);
        w.find(id)->zone = VehicleZone::Inside;
        auto seg = occupancy_map(w, 1);
        for (int k = 0; k < 10; ++k) CHECK(seg[k] == (k == 5 ? 1 : 0));
    }
    SUBCASE("vehicles at 5% and 95% set segments 0 and 9") {
        int a = w.add_vehicle(1, 0, VehicleKind::HV, 0.05 * len, 5.0);
        int b = w.add_vehicle(1, 0, VehicleKind::HV, 0.95 * len, 5.0);
        w.find(a)->zone = VehicleZone::Inside;
        w.find(b)->zone = VehicleZone::Inside;
        auto seg = occupancy_map(w, 1);
        for (int k = 0; k < 10; ++k) CHECK(seg[k] == ((k == 0 || k == 9) ? 1 : 0));
    }
    SUBCASE("fraction 1.0 maps to segment 9") {
        int id = w.add_vehicle(1, 0, VehicleKind::HV, len, 5.0);
        w.find(id)->zone = VehicleZone::Inside;
        auto seg = occupancy_map(w, 1);
        CHECK(seg[9] == 1);
    }
}

TEST_CASE("ego estimates exist only for stopped in-zone RVs") {
    World w(canonical_geo());
    int id = w.add_vehicle(1, 0, VehicleKind::RV, -25.0, 0.0);
    Vehicle* v = w.find(id);
    v->zone = VehicleZone::ControlZone;
    v->wait_accum = 17.0;
    auto est = ego_estimates(*v);
    REQUIRE(est.has_value());
    CHECK(est->first == doctest::Approx(5.0)); // 25 / 5
    CHECK(est->second == doctest::Approx(17.0));

    v->s = -12.0;
    CHECK(ego_estimates(*v)->first == doctest::Approx(2.4));
    v->s = 0.0;
    CHECK(ego_estimates(*v)->first == doctest::Approx(0.0));

    v->v = 5.0; // moving: no broadcast
    CHECK_FALSE(ego_estimates(*v).has_value());
    v->v = 0.0;
    v->kind = VehicleKind::HV;
    CHECK_FALSE(ego_estimates(*v).has_value());
}

TEST_CASE("observation length is 12J+1 and inactive directions zero-fill") {
    SUBCASE("J = 8") {
        World w(canonical_geo(8));
        int id = w.add_vehicle(1, 0, VehicleKind::RV, -30.0, 3.0);
        w.find(id)->zone = VehicleZone::ControlZone;
        Observation o = encode_observation(w, *w.find(id), all_ground_truth_stats(w));
        CHECK(static_cast<int>(o.values.size()) == 97);
        CHECK(o.values.back() == doctest::Approx(1.0)); // d = 30 -> scaled 1
    }
    SUBCASE("J = 12") {
        IntersectionSpec spec;
        spec.mode = 12;
        auto geo = std::make_shared<const Intersection>(build_intersection(spec));
        World w(geo);
        int id = w.add_vehicle(1, 0, VehicleKind::RV, -10.0, 3.0);
        w.find(id)->zone = VehicleZone::ControlZone;
        Observation o = encode_observation(w, *w.find(id), all_ground_truth_stats(w));
        CHECK(static_cast<int>(o.values.size()) == 145);
    }
    SUBCASE("three-way: absent directions stay zero") {
        IntersectionSpec spec;
        spec.legs[static_cast<int>(Leg::W)] = false;
        auto geo = std::make_shared<const Intersection>(build_intersection(spec));
        World w(geo);
        int id = w.add_vehicle(canonical_index({Approach::N, Movement::C}, 8), 0,
                               VehicleKind::RV, -15.0, 3.0);
        w.find(id)->zone = VehicleZone::ControlZone;
        Observation o = encode_observation(w, *w.find(id), all_ground_truth_stats(w));
        CHECK(static_cast<int>(o.values.size()) == 97);
        // E-L and E-C are inactive: their stat and occupancy entries are zero
        for (int j : {0, 1}) {
            CHECK(o.values[2 * j] == 0.0);
            CHECK(o.values[2 * j + 1] == 0.0);
            for (int k = 0; k < 10; ++k) CHECK(o.values[16 + 10 * j + k] == 0.0);
        }
    }
}

TEST_CASE("encoding rejects an ego outside the control zone") {
    World w(canonical_geo());
    int id = w.add_vehicle(1, 0, VehicleKind::RV, -60.0, 10.0);
    CHECK(w.find(id)->zone == VehicleZone::Upstream);
    CHECK_THROWS_AS(encode_observation(w, *w.find(id), all_ground_truth_stats(w)),
                    std::runtime_error);
}

TEST_CASE("a single interior vehicle sets exactly one flag per direction") {
    World w(canonical_geo());
    double len = w.geo().path_length(3);
    int id = w.add_vehicle(3, 0, VehicleKind::HV, 0.37 * len, 4.0);
    w.find(id)->zone = VehicleZone::Inside;
    auto seg = occupancy_map(w, 3);
    int set = 0;
    for (uint8_t b : seg) set += b;
    CHECK(set == 1);
}
