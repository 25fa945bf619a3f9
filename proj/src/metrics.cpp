#include "cxflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace cxflow {

namespace {

bool present(const VehicleSnap& v) {
    return v.zone == VehicleZone::ControlZone || v.zone == VehicleZone::Inside;
}

bool still_in_zone(const VehicleSnap& v) {
    return v.zone == VehicleZone::ControlZone && v.v < kStillSpeed;
}

} // namespace

AwtResult awt(const RunLog& log, AwtScope scope, int direction, int from, int to,
              WaitMode mode) {
    if (!log.has_snapshots())
        throw std::invalid_argument("awt: log carries no vehicle snapshots");
    from = std::max(0, from);
    to = std::min(to, static_cast<int>(log.steps.size()));
    if (from >= to) return {0.0, true};

    struct PerVehicle {
        double total = 0.0;
        double current_run = 0.0;
        double longest_run = 0.0;
    };
    std::map<int, PerVehicle> wait; // vehicles present in scope during the window

    for (int t = from; t < to; ++t) {
        for (const VehicleSnap& v : log.steps[t].vehicles) {
            if (scope == AwtScope::Direction && v.stream != direction) continue;
            if (!present(v)) continue;
            PerVehicle& pv = wait[v.id];
            if (still_in_zone(v)) {
                pv.total += 1.0;
                pv.current_run += 1.0;
                pv.longest_run = std::max(pv.longest_run, pv.current_run);
            } else {
                pv.current_run = 0.0;
            }
        }
    }
    if (wait.empty()) return {0.0, true};
    double sum = 0.0;
    for (const auto& [id, pv] : wait)
        sum += mode == WaitMode::Accumulated ? pv.total : pv.longest_run;
    return {sum / static_cast<double>(wait.size()), false};
}

double congestion_level(double awt_value, double threshold) {
    if (threshold <= 0.0) throw std::invalid_argument("congestion_level: threshold must be > 0");
    return std::min(awt_value / threshold, 1.0);
}

std::optional<double> conflict_rate(const RunLog& log, int from, int to) {
    from = std::max(0, from);
    to = std::min(to, static_cast<int>(log.steps.size()));
    long long decisions = 0, conflicts = 0;
    for (int t = from; t < to; ++t) {
        for (const DecisionRecord& d : log.steps[t].decisions) {
            ++decisions;
            if (d.conflict && d.action == Action::Go) ++conflicts;
        }
    }
    if (decisions == 0) return std::nullopt;
    return static_cast<double>(conflicts) / static_cast<double>(decisions);
}

double slope_tail(const std::vector<double>& series, int window) {
    int n = static_cast<int>(series.size());
    int m = std::min(n, std::max(2, window));
    if (n < 2) return 0.0;
    int start = n - m;
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < m; ++i) {
        sx += i;
        sy += series[start + i];
    }
    double mx = sx / m, my = sy / m;
    double cov = 0.0, var = 0.0;
    for (int i = 0; i < m; ++i) {
        cov += (i - mx) * (series[start + i] - my);
        var += (i - mx) * (i - mx);
    }
    return var > 0.0 ? cov / var : 0.0;
}

std::optional<double> avg_speed_at(const RunLog& log, int step) {
    if (!log.has_snapshots())
        throw std::invalid_argument("avg_speed_at: log carries no vehicle snapshots");
    if (step < 0 || step >= static_cast<int>(log.steps.size())) return std::nullopt;
    double sum = 0.0;
    int n = 0;
    for (const VehicleSnap& v : log.steps[step].vehicles) {
        if (!present(v)) continue;
        sum += v.v;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

bool congested(const RunLog& log, int from, int to) {
    from = std::max(0, from);
    to = std::min(to, static_cast<int>(log.steps.size()));
    int streak = 0;
    for (int t = from; t < to; ++t) {
        auto v = avg_speed_at(log, t);
        if (v && *v < kCongestionSpeed) {
            if (++streak >= kCongestionSteps) return true;
        } else {
            streak = 0;
        }
    }
    return false;
}

std::vector<double> awt_series(const RunLog& log) {
    if (!log.has_snapshots())
        throw std::invalid_argument("awt_series: log carries no vehicle snapshots");
    std::vector<double> out;
    out.reserve(log.steps.size());
    for (const StepRecord& rec : log.steps) {
        double sum = 0.0;
        int n = 0;
        for (const VehicleSnap& v : rec.vehicles) {
            if (!present(v)) continue;
            sum += v.wait_accum;
            ++n;
        }
        out.push_back(n > 0 ? sum / n : 0.0);
    }
    return out;
}

} // namespace cxflow
