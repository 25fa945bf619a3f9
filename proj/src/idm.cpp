#include "cxflow/idm.hpp"

#include <algorithm>
#include <cmath>

namespace cxflow {

double brake_displacement(double u, double b, double dt) {
    double d = 0.0;
    double v = u;
    while (v > 0.0) {
        v = std::max(0.0, v - b * dt);
        d += v * dt;
    }
    return d;
}

double idm_accel(double v, double gap, double leader_v, const IdmParams& p) {
    if (gap <= 0.0) return -p.b_emergency;
    double free_term = 1.0 - std::pow(v / p.v0, p.delta);
    double a;
    if (std::isinf(gap)) {
        a = p.a_max * free_term;
    } else {
        double s_star = p.s0 + std::max(0.0, v * p.headway +
                                                 v * (v - leader_v) /
                                                     (2.0 * std::sqrt(p.a_max * p.b)));
        double ratio = s_star / gap;
        a = p.a_max * (free_term - ratio * ratio);
    }
    return std::clamp(a, -p.b_emergency, p.a_max);
}

double safe_speed_cap(double proposed_a, double v, double gap, double leader_v,
                      const IdmParams& p, double dt) {
    if (std::isinf(gap)) return proposed_a;
    // Small margin keeps the cap strictly inside the safe region instead of
    // exactly on its boundary.
    double leader_room = gap + brake_displacement(leader_v, p.b_emergency, dt) - 1e-6;
    // Largest next-step speed vp with vp*dt + brake_displacement(vp) < leader_room.
    // The left side is strictly increasing in vp, so bisect.
    auto travel = [&](double vp) { return vp * dt + brake_displacement(vp, p.b_emergency, dt); };
    double hi = std::max(0.0, v + p.a_max * dt);
    double safe_v;
    if (travel(hi) < leader_room) {
        safe_v = hi;
    } else if (travel(0.0) >= leader_room) {
        safe_v = 0.0;
    } else {
        double lo = 0.0;
        for (int i = 0; i < 60; ++i) {
            double mid = 0.5 * (lo + hi);
            if (travel(mid) < leader_room)
                lo = mid;
            else
                hi = mid;
        }
        safe_v = lo;
    }
    double cap = (safe_v - v) / dt;
    return std::max(std::min(proposed_a, cap), -p.b_emergency);
}

} // namespace cxflow
