#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cxflow/idm.hpp"
#include "cxflow/rng.hpp"

using namespace cxflow;

TEST_CASE("idm free road from standstill gives a_max") {
    IdmParams p;
    CHECK(idm_accel(0.0, kInfGap, 0.0, p) == doctest::Approx(2.6));
}

TEST_CASE("idm equilibrium at desired speed") {
    IdmParams p;
    CHECK(idm_accel(p.v0, kInfGap, 0.0, p) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("idm hand-evaluated following case") {
    // v=10, v0=13.89, leader at 10, gap 20, s0=1, T=1:
    // s* = 1 + 10*1 + 0 = 11, a = 2.6*(1 - (10/13.89)^4 - (11/20)^2)
    IdmParams p;
    p.s0 = 1.0;
    p.headway = 1.0;
    double a = idm_accel(10.0, 20.0, 10.0, p);
    CHECK(a == doctest::Approx(1.115).epsilon(1e-3));
}

TEST_CASE("idm non-positive gap returns emergency braking") {
    IdmParams p;
    CHECK(idm_accel(5.0, 0.0, 0.0, p) == doctest::Approx(-p.b_emergency));
    CHECK(idm_accel(5.0, -1.0, 0.0, p) == doctest::Approx(-p.b_emergency));
}

namespace {

// Brute-force oracle: simulate follower at next-step speed vp then braking at
// b_emergency, leader braking at b_emergency from now; safe iff the follower
// never reaches the leader's rear.
bool survives(double vp, double gap, double leader_v, const IdmParams& p) {
    double rel = gap; // distance from follower front to leader rear
    double vf = vp, vl = std::max(0.0, leader_v - p.b_emergency);
    for (int step = 0; step < 10000; ++step) {
        rel += vl - vf;
        if (rel <= 0.0) return false;
        if (vf == 0.0 && vl == 0.0) return true;
        vf = std::max(0.0, vf - p.b_emergency);
        vl = std::max(0.0, vl - p.b_emergency);
    }
    return true;
}

} // namespace

TEST_CASE("safe cap: no leader leaves the proposal unchanged") {
    IdmParams p;
    CHECK(safe_speed_cap(1.7, 8.0, kInfGap, 0.0, p) == doctest::Approx(1.7));
}

TEST_CASE("safe cap: closing fast on a stopped leader forces emergency braking") {
    IdmParams p;
    // brute-force: every speed achievable from v=10 in one step collides
    for (double vp = 10.0 - p.b_emergency; vp <= 10.0 + p.a_max; vp += 0.1)
        CHECK_FALSE(survives(vp, 1.0, 0.0, p));
    CHECK(safe_speed_cap(2.6, 10.0, 1.0, 0.0, p) == doctest::Approx(-p.b_emergency));
}

TEST_CASE("safe cap is an upper bound only") {
    IdmParams p;
    CHECK(safe_speed_cap(-4.0, 3.0, 50.0, 10.0, p) == doctest::Approx(-4.0));
}

TEST_CASE("safe cap matches brute-force oracle on random cases") {
    IdmParams p;
    Rng rng(42);
    for (int i = 0; i < 300; ++i) {
        double v = rng.uniform(0.0, 15.0);
        double gap = rng.uniform(0.5, 60.0);
        double lv = rng.uniform(0.0, 15.0);
        double a = safe_speed_cap(p.a_max, v, gap, lv, p);
        double vp = std::max(0.0, v + a);
        // at the -b_emergency floor the state may already be past saving
        bool ok = survives(vp, gap, lv, p) || vp == 0.0 || a == -p.b_emergency;
        CHECK(ok);
        // one notch faster must fail (when the cap actually bound)
        if (a < p.a_max - 1e-9 && vp + 0.05 <= v + p.a_max)
            CHECK_FALSE(survives(vp + 0.05, gap, lv, p));
    }
}
