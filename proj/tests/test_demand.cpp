#include <doctest.h>

#include <cmath>
#include <memory>

#include "cxflow/demand.hpp"

using namespace cxflow;

namespace {

DemandProfile uniform_profile(double count, int slots = 8) {
    DemandProfile p;
    p.arrival_model = ArrivalModel::Uniform;
    p.counts.assign(slots, 0.0);
    p.counts[1] = count; // E-C only
    return p;
}

} // namespace

TEST_CASE("uniform arrivals at 360 v/h have exactly 10 s headways") {
    Rng rng(1);
    auto sched = arrivals(uniform_profile(360.0), 3600.0, rng);
    REQUIRE(sched.size() == 359); // first at 10 s, last below 3600 s
    for (size_t i = 0; i < sched.size(); ++i)
        CHECK(sched[i].time == doctest::Approx(10.0 * (i + 1)));
}

TEST_CASE("zero count produces no arrivals") {
    Rng rng(1);
    auto sched = arrivals(uniform_profile(0.0), 3600.0, rng);
    CHECK(sched.empty());
}

TEST_CASE("poisson arrival rate matches the configured demand within 3 sigma") {
    Rng rng(7);
    DemandProfile p = uniform_profile(720.0);
    p.arrival_model = ArrivalModel::Poisson;
    double horizon = 1e5;
    auto sched = arrivals(p, horizon, rng);
    double rate = static_cast<double>(sched.size()) / horizon;
    double expected = 0.2; // 720/3600
    double sigma = std::sqrt(expected / horizon);
    CHECK(std::abs(rate - expected) < 3.0 * sigma);
}

TEST_CASE("rv assignment follows the penetration rate") {
    auto geo = std::make_shared<const Intersection>(build_intersection(IntersectionSpec{}));
    SUBCASE("rate 1.0 spawns only RVs") {
        World w(geo);
        DemandProfile p = uniform_profile(600.0);
        p.rv_rate = 1.0;
        Rng demand_rng(3), kinds(4);
        Spawner sp(arrivals(p, 600.0, demand_rng), p);
        std::vector<EventRecord> ev;
        StepInput in;
        for (int t = 0; t < 600; ++t) {
            sp.step(w, kinds, ev);
            in.may_cross.clear();
            for (const Vehicle& v : w.vehicles()) in.may_cross.insert(v.id);
            w.step(in);
        }
        CHECK(sp.spawned_total() > 50);
        for (const Vehicle& v : w.vehicles()) CHECK(v.kind == VehicleKind::RV);
    }
    SUBCASE("rate 0.6 matches a binomial 3-sigma band") {
        DemandProfile p = uniform_profile(600.0);
        p.rv_rate = 0.6;
        // kind draws are one bernoulli per spawn
        Rng kinds(11);
        int n = 10000, rv = 0;
        for (int i = 0; i < n; ++i)
            if (kinds.bernoulli(p.rv_rate)) ++rv;
        double frac = static_cast<double>(rv) / n;
        double sigma = std::sqrt(0.6 * 0.4 / n);
        CHECK(std::abs(frac - 0.6) < 3.0 * sigma);
    }
}

TEST_CASE("blocked lane backlogs arrivals and conserves demand") {
    auto geo = std::make_shared<const Intersection>(build_intersection(IntersectionSpec{}));
    World w(geo);
    // a parked vehicle at the upstream end blocks insertion
    int blocker = w.add_vehicle(1, 0, VehicleKind::HV, -geo->approach_length() + 1.0, 0.0);
    (void)blocker;
    DemandProfile p = uniform_profile(1200.0);
    Rng demand_rng(5), kinds(6);
    Spawner sp(arrivals(p, 120.0, demand_rng), p);
    std::vector<EventRecord> ev;
    for (int t = 0; t < 120; ++t) {
        sp.step(w, kinds, ev);
        StepInput in; // nobody moves: no may_cross, blocker stays
        w.step(in);
        CHECK(sp.scheduled_so_far() == sp.spawned_total() + sp.backlog_size());
    }
    CHECK(sp.backlog_size() > 0);
}

TEST_CASE("geh formula") {
    CHECK(geh(100.0, 100.0) == doctest::Approx(0.0));
    CHECK(geh(105.0, 100.0) == doctest::Approx(std::sqrt(50.0 / 205.0)).epsilon(1e-9));
    CHECK(geh(0.0, 0.0) == doctest::Approx(0.0));
    // halved flow vs a 700 v/h profile fails the < 5 bar
    CHECK(geh(350.0, 700.0) == doctest::Approx(std::sqrt(2.0 * 350.0 * 350.0 / 1050.0)).epsilon(1e-9));
    CHECK(geh(350.0, 700.0) > 5.0);
}

TEST_CASE("geh is symmetric and positive-definite") {
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        double m = rng.uniform(0.0, 1000.0);
        double c = rng.uniform(0.0, 1000.0);
        CHECK(geh(m, c) == doctest::Approx(geh(c, m)));
        CHECK(geh(m, c) >= 0.0);
    }
    CHECK(geh(42.0, 42.0) == 0.0);
}

TEST_CASE("validate_demand rejects short runs and windows") {
    RunLog log;
    log.level = LogLevel::EventsOnly;
    log.steps.resize(100);
    DemandProfile p = uniform_profile(100.0);
    CHECK_THROWS_AS(validate_demand(log, p, 3600.0), std::invalid_argument);
    CHECK_THROWS_AS(validate_demand(log, p, 100.0), std::invalid_argument);
}

TEST_CASE("validate_demand counts enter events over the trailing window") {
    RunLog log;
    log.level = LogLevel::EventsOnly;
    int steps = 4000;
    log.steps.resize(steps);
    for (int t = 0; t < steps; ++t) {
        log.steps[t].step = t;
        if (t >= 400 && t % 10 == 0) // one entry each 10 s -> 360 v/h
            log.steps[t].events.push_back({EventType::Enter, t, 1, ""});
    }
    DemandProfile p = uniform_profile(360.0);
    GehReport rep = validate_demand(log, p, 3600.0);
    CHECK(rep.per_stream[1] == doctest::Approx(0.0));
    CHECK(rep.mean == doctest::Approx(0.0));
}
