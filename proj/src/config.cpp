#include "cxflow/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cxflow {

const char* kVersion = "0.1.0";

namespace {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(int line, const std::string& key, const std::string& what) {
    throw ParseError("config line " + std::to_string(line) + ", key '" + key + "': " + what);
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line, const std::string& key) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') fail(line, key, "expected a number, got '" + v + "'");
    return x;
}

long long parse_int(const std::string& v, int line, const std::string& key) {
    char* end = nullptr;
    long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') fail(line, key, "expected an integer, got '" + v + "'");
    return x;
}

uint64_t parse_u64(const std::string& v, int line, const std::string& key) {
    char* end = nullptr;
    unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') fail(line, key, "expected an integer, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(line, key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

void check_stream_name(const std::string& name, int line, const std::string& key) {
    try {
        parse_stream(name);
    } catch (const std::exception&) {
        fail(line, key, "'" + name + "' is not a stream name");
    }
}

// shortest representation that round-trips exactly
std::string fmt_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

} // namespace

IntersectionSpec ScenarioConfig::intersection_spec() const {
    IntersectionSpec spec;
    spec.mode = mode;
    spec.legs = legs;
    spec.lanes_per_movement = lanes_per_movement;
    spec.lanes_override = lanes_override;
    spec.approach_length = approach_length;
    spec.control_zone_radius = control_zone_radius;
    spec.lane_width = lane_width;
    spec.box_side = box_side;
    return spec;
}

DemandProfile ScenarioConfig::demand_profile() const {
    DemandProfile p;
    p.arrival_model = arrival_model;
    p.rv_rate = rv_rate;
    const auto& order = canonical_streams(mode);
    Intersection geo = build_intersection(intersection_spec());
    p.counts.assign(order.size(), 0.0);
    for (size_t j = 0; j < order.size(); ++j) {
        if (!geo.active(static_cast<int>(j))) continue;
        auto it = count_override.find(stream_name(order[j]));
        p.counts[j] = it != count_override.end() ? it->second : count_default;
    }
    return p;
}

ScenarioConfig parse_config_text(const std::string& text) {
    ScenarioConfig cfg;
    std::map<int, EventSpec> events;
    std::map<int, bool> event_has_kind;

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line) + ": expected 'key = value'");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError("config line " + std::to_string(line) + ": empty key");
        if (val.empty()) fail(line, key, "empty value");

        if (key == "intersection.mode") {
            long long m = parse_int(val, line, key);
            if (m != 8 && m != 12) fail(line, key, "must be 8 or 12");
            cfg.mode = static_cast<int>(m);
        } else if (key == "intersection.legs") {
            cfg.legs = {false, false, false, false};
            for (const std::string& l : split(val, ',')) {
                if (l == "N") cfg.legs[0] = true;
                else if (l == "E") cfg.legs[1] = true;
                else if (l == "S") cfg.legs[2] = true;
                else if (l == "W") cfg.legs[3] = true;
                else fail(line, key, "'" + l + "' is not a leg (N,E,S,W)");
            }
        } else if (key == "intersection.lanes_per_movement") {
            long long n = parse_int(val, line, key);
            if (n < 0 || n > 8) fail(line, key, "must be in [0, 8]");
            cfg.lanes_per_movement = static_cast<int>(n);
        } else if (key.rfind("intersection.lanes.", 0) == 0) {
            std::string stream = key.substr(19);
            check_stream_name(stream, line, key);
            long long n = parse_int(val, line, key);
            if (n < 0 || n > 8) fail(line, key, "must be in [0, 8]");
            cfg.lanes_override[stream] = static_cast<int>(n);
        } else if (key == "intersection.approach_length") {
            cfg.approach_length = parse_double(val, line, key);
            if (cfg.approach_length <= 0.0) fail(line, key, "must be positive");
        } else if (key == "intersection.control_zone_radius") {
            cfg.control_zone_radius = parse_double(val, line, key);
            if (cfg.control_zone_radius <= 0.0) fail(line, key, "must be positive");
        } else if (key == "intersection.lane_width") {
            cfg.lane_width = parse_double(val, line, key);
            if (cfg.lane_width <= 0.0) fail(line, key, "must be positive");
        } else if (key == "intersection.box_side") {
            cfg.box_side = parse_double(val, line, key);
            if (cfg.box_side < 0.0) fail(line, key, "must be >= 0 (0 = auto)");
        } else if (key == "demand.arrival_model") {
            if (val == "poisson") cfg.arrival_model = ArrivalModel::Poisson;
            else if (val == "uniform") cfg.arrival_model = ArrivalModel::Uniform;
            else fail(line, key, "must be poisson or uniform");
        } else if (key == "demand.count.default") {
            cfg.count_default = parse_double(val, line, key);
            if (cfg.count_default < 0.0) fail(line, key, "must be >= 0");
        } else if (key.rfind("demand.count.", 0) == 0) {
            std::string stream = key.substr(13);
            check_stream_name(stream, line, key);
            double c = parse_double(val, line, key);
            if (c < 0.0) fail(line, key, "must be >= 0");
            cfg.count_override[stream] = c;
        } else if (key == "demand.rv_rate") {
            cfg.rv_rate = parse_double(val, line, key);
            if (cfg.rv_rate < 0.0 || cfg.rv_rate > 1.0) fail(line, key, "must be in [0, 1]");
        } else if (key == "controller.type") {
            if (val == "tl") cfg.controller = ControllerType::TL;
            else if (val == "notl") cfg.controller = ControllerType::NoTL;
            else if (val == "policy") cfg.controller = ControllerType::Policy;
            else fail(line, key, "must be tl, notl or policy");
        } else if (key == "controller.checkpoint") {
            cfg.checkpoint = val;
        } else if (key == "controller.stats_source") {
            if (val == "ground_truth") cfg.stats_source = StatsSource::GroundTruth;
            else if (val == "v2v") cfg.stats_source = StatsSource::V2V;
            else fail(line, key, "must be ground_truth or v2v");
        } else if (key == "controller.epsilon") {
            cfg.policy_epsilon = parse_double(val, line, key);
            if (cfg.policy_epsilon < 0.0 || cfg.policy_epsilon > 1.0)
                fail(line, key, "must be in [0, 1]");
        } else if (key == "controller.resolution") {
            cfg.resolution = parse_bool(val, line, key);
        } else if (key == "tl.phases") {
            cfg.tl_phases = split(val, '|');
            for (const std::string& ph : cfg.tl_phases)
                for (const std::string& st : split(ph, '+')) check_stream_name(st, line, key);
        } else if (key == "tl.green") {
            cfg.tl_green = parse_double(val, line, key);
            if (cfg.tl_green <= 0.0) fail(line, key, "must be positive");
        } else if (key == "tl.yellow") {
            cfg.tl_yellow = parse_double(val, line, key);
            if (cfg.tl_yellow < 0.0) fail(line, key, "must be >= 0");
        } else if (key == "tl.all_red") {
            cfg.tl_all_red = parse_double(val, line, key);
            if (cfg.tl_all_red < 0.0) fail(line, key, "must be >= 0");
        } else if (key == "comm.enabled") {
            cfg.comm_enabled = parse_bool(val, line, key);
        } else if (key == "comm.protocol") {
            if (val == "long_range") cfg.comm.protocol = CommProtocol::LongRange;
            else if (val == "short_range") cfg.comm.protocol = CommProtocol::ShortRange;
            else fail(line, key, "must be long_range or short_range");
        } else if (key == "comm.per") {
            cfg.comm.per = parse_double(val, line, key);
            if (cfg.comm.per < 0.0 || cfg.comm.per > 1.0) fail(line, key, "must be in [0, 1]");
        } else if (key == "comm.long_range_radius") {
            cfg.comm.long_range_radius = parse_double(val, line, key);
            if (cfg.comm.long_range_radius <= 0.0) fail(line, key, "must be positive");
        } else if (key == "comm.hop_range") {
            cfg.comm.hop_range = parse_double(val, line, key);
            if (cfg.comm.hop_range <= 0.0) fail(line, key, "must be positive");
        } else if (key == "comm.max_hops") {
            long long n = parse_int(val, line, key);
            if (n < 1 || n > 8) fail(line, key, "must be in [1, 8]");
            cfg.comm.max_hops = static_cast<int>(n);
        } else if (key.rfind("event.", 0) == 0) {
            size_t dot = key.find('.', 6);
            if (dot == std::string::npos) fail(line, key, "expected event.<index>.<field>");
            int idx;
            try {
                idx = std::stoi(key.substr(6, dot - 6));
            } catch (const std::exception&) {
                fail(line, key, "bad event index");
            }
            std::string field = key.substr(dot + 1);
            EventSpec& ev = events[idx];
            if (field == "kind") {
                if (val == "blackout") ev.kind = EventKind::Blackout;
                else if (val == "rv_drop") ev.kind = EventKind::RvDrop;
                else fail(line, key, "must be blackout or rv_drop");
                event_has_kind[idx] = true;
            } else if (field == "at_step") {
                long long n = parse_int(val, line, key);
                if (n < 0) fail(line, key, "must be >= 0");
                ev.at_step = static_cast<int>(n);
            } else if (field == "successor") {
                if (val == "notl") ev.successor = SuccessorKind::NoTL;
                else if (val == "policy") ev.successor = SuccessorKind::Policy;
                else fail(line, key, "must be notl or policy");
            } else if (field == "target_rate") {
                ev.target_rate = parse_double(val, line, key);
                if (ev.target_rate < 0.0 || ev.target_rate > 1.0)
                    fail(line, key, "must be in [0, 1]");
            } else {
                fail(line, key, "unknown event field");
            }
        } else if (key == "run.horizon") {
            long long n = parse_int(val, line, key);
            if (n <= 0) fail(line, key, "must be positive");
            cfg.horizon = static_cast<int>(n);
        } else if (key == "run.seed") {
            cfg.seed = parse_u64(val, line, key);
        } else if (key == "run.repeats") {
            long long n = parse_int(val, line, key);
            if (n <= 0) fail(line, key, "must be positive");
            cfg.repeats = static_cast<int>(n);
        } else if (key == "metrics.wait_mode") {
            if (val == "accumulated") cfg.wait_mode = WaitMode::Accumulated;
            else if (val == "longest") cfg.wait_mode = WaitMode::LongestInterval;
            else fail(line, key, "must be accumulated or longest");
        } else if (key == "metrics.slope_window") {
            long long n = parse_int(val, line, key);
            if (n < 2) fail(line, key, "must be >= 2");
            cfg.slope_window = static_cast<int>(n);
        } else if (key == "metrics.cl_threshold") {
            cfg.cl_threshold = parse_double(val, line, key);
            if (cfg.cl_threshold <= 0.0) fail(line, key, "must be positive");
        } else if (key == "validate.window") {
            cfg.validate_window = parse_double(val, line, key);
            if (cfg.validate_window < 3600.0) fail(line, key, "must be >= 3600");
        } else if (key == "learn.gamma") {
            cfg.learn.gamma = parse_double(val, line, key);
            if (cfg.learn.gamma < 0.0 || cfg.learn.gamma >= 1.0) fail(line, key, "must be in [0, 1)");
        } else if (key == "learn.lr") {
            cfg.learn.lr = parse_double(val, line, key);
            if (cfg.learn.lr <= 0.0) fail(line, key, "must be positive");
        } else if (key == "learn.momentum") {
            cfg.learn.momentum = parse_double(val, line, key);
            if (cfg.learn.momentum < 0.0 || cfg.learn.momentum >= 1.0)
                fail(line, key, "must be in [0, 1)");
        } else if (key == "learn.batch") {
            long long n = parse_int(val, line, key);
            if (n <= 0) fail(line, key, "must be positive");
            cfg.learn.batch = static_cast<int>(n);
        } else if (key == "learn.buffer_capacity") {
            long long n = parse_int(val, line, key);
            if (n <= 0) fail(line, key, "must be positive");
            cfg.learn.buffer_capacity = static_cast<int>(n);
        } else if (key == "learn.priority_alpha") {
            cfg.learn.priority_alpha = parse_double(val, line, key);
            if (cfg.learn.priority_alpha < 0.0) fail(line, key, "must be >= 0");
        } else if (key == "learn.is_beta") {
            cfg.learn.is_beta = parse_double(val, line, key);
            if (cfg.learn.is_beta < 0.0) fail(line, key, "must be >= 0");
        } else if (key == "learn.target_sync_every") {
            long long n = parse_int(val, line, key);
            if (n <= 0) fail(line, key, "must be positive");
            cfg.learn.target_sync_every = static_cast<int>(n);
        } else if (key == "learn.warmup") {
            long long n = parse_int(val, line, key);
            if (n < 1) fail(line, key, "must be >= 1");
            cfg.learn.warmup = static_cast<int>(n);
        } else if (key == "learn.eps_start") {
            cfg.learn.eps_start = parse_double(val, line, key);
            if (cfg.learn.eps_start < 0.0 || cfg.learn.eps_start > 1.0)
                fail(line, key, "must be in [0, 1]");
        } else if (key == "learn.eps_end") {
            cfg.learn.eps_end = parse_double(val, line, key);
            if (cfg.learn.eps_end < 0.0 || cfg.learn.eps_end > 1.0)
                fail(line, key, "must be in [0, 1]");
        } else if (key == "learn.eps_decay_steps") {
            long long n = parse_int(val, line, key);
            if (n <= 0) fail(line, key, "must be positive");
            cfg.learn.eps_decay_steps = static_cast<int>(n);
        } else if (key == "learn.epochs") {
            long long n = parse_int(val, line, key);
            if (n <= 0) fail(line, key, "must be positive");
            cfg.learn.epochs = static_cast<int>(n);
        } else if (key == "learn.invert_local_reward") {
            cfg.learn.invert_local_reward = parse_bool(val, line, key);
        } else {
            throw ParseError("config line " + std::to_string(line) + ": unknown key '" + key + "'");
        }
    }

    for (auto& [idx, ev] : events) {
        if (!event_has_kind[idx])
            throw ParseError("config: event." + std::to_string(idx) + " lacks a kind");
        cfg.events.push_back(ev);
    }
    std::sort(cfg.events.begin(), cfg.events.end(),
              [](const EventSpec& a, const EventSpec& b) { return a.at_step < b.at_step; });
    return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_manifest(const ScenarioConfig& cfg) {
    std::ostringstream o;
    o << "# cxflow " << kVersion << " manifest\n";
    o << "intersection.mode = " << cfg.mode << "\n";
    o << "intersection.legs = ";
    {
        const char* names[4] = {"N", "E", "S", "W"};
        bool first = true;
        for (int i = 0; i < 4; ++i) {
            if (!cfg.legs[i]) continue;
            if (!first) o << ",";
            o << names[i];
            first = false;
        }
        o << "\n";
    }
    o << "intersection.lanes_per_movement = " << cfg.lanes_per_movement << "\n";
    for (const auto& [k, v] : cfg.lanes_override)
        o << "intersection.lanes." << k << " = " << v << "\n";
    o << "intersection.approach_length = " << fmt_double(cfg.approach_length) << "\n";
    o << "intersection.control_zone_radius = " << fmt_double(cfg.control_zone_radius) << "\n";
    o << "intersection.lane_width = " << fmt_double(cfg.lane_width) << "\n";
    o << "intersection.box_side = " << fmt_double(cfg.box_side) << "\n";
    o << "demand.arrival_model = "
      << (cfg.arrival_model == ArrivalModel::Poisson ? "poisson" : "uniform") << "\n";
    o << "demand.count.default = " << fmt_double(cfg.count_default) << "\n";
    for (const auto& [k, v] : cfg.count_override)
        o << "demand.count." << k << " = " << fmt_double(v) << "\n";
    o << "demand.rv_rate = " << fmt_double(cfg.rv_rate) << "\n";
    o << "controller.type = "
      << (cfg.controller == ControllerType::TL
              ? "tl"
              : cfg.controller == ControllerType::NoTL ? "notl" : "policy")
      << "\n";
    if (!cfg.checkpoint.empty()) o << "controller.checkpoint = " << cfg.checkpoint << "\n";
    o << "controller.stats_source = "
      << (cfg.stats_source == StatsSource::GroundTruth ? "ground_truth" : "v2v") << "\n";
    o << "controller.epsilon = " << fmt_double(cfg.policy_epsilon) << "\n";
    o << "controller.resolution = " << (cfg.resolution ? "true" : "false") << "\n";
    if (!cfg.tl_phases.empty()) {
        o << "tl.phases = ";
        for (size_t i = 0; i < cfg.tl_phases.size(); ++i) {
            if (i) o << "|";
            o << cfg.tl_phases[i];
        }
        o << "\n";
    }
    o << "tl.green = " << fmt_double(cfg.tl_green) << "\n";
    o << "tl.yellow = " << fmt_double(cfg.tl_yellow) << "\n";
    o << "tl.all_red = " << fmt_double(cfg.tl_all_red) << "\n";
    o << "comm.enabled = " << (cfg.comm_enabled ? "true" : "false") << "\n";
    o << "comm.protocol = "
      << (cfg.comm.protocol == CommProtocol::LongRange ? "long_range" : "short_range") << "\n";
    o << "comm.per = " << fmt_double(cfg.comm.per) << "\n";
    o << "comm.long_range_radius = " << fmt_double(cfg.comm.long_range_radius) << "\n";
    o << "comm.hop_range = " << fmt_double(cfg.comm.hop_range) << "\n";
    o << "comm.max_hops = " << cfg.comm.max_hops << "\n";
    for (size_t i = 0; i < cfg.events.size(); ++i) {
        const EventSpec& ev = cfg.events[i];
        o << "event." << i << ".kind = "
          << (ev.kind == EventKind::Blackout ? "blackout" : "rv_drop") << "\n";
        o << "event." << i << ".at_step = " << ev.at_step << "\n";
        if (ev.kind == EventKind::Blackout)
            o << "event." << i << ".successor = "
              << (ev.successor == SuccessorKind::NoTL ? "notl" : "policy") << "\n";
        else
            o << "event." << i << ".target_rate = " << fmt_double(ev.target_rate) << "\n";
    }
    o << "run.horizon = " << cfg.horizon << "\n";
    o << "run.seed = " << cfg.seed << "\n";
    o << "run.repeats = " << cfg.repeats << "\n";
    o << "metrics.wait_mode = "
      << (cfg.wait_mode == WaitMode::Accumulated ? "accumulated" : "longest") << "\n";
    o << "metrics.slope_window = " << cfg.slope_window << "\n";
    o << "metrics.cl_threshold = " << fmt_double(cfg.cl_threshold) << "\n";
    o << "validate.window = " << fmt_double(cfg.validate_window) << "\n";
    o << "learn.gamma = " << fmt_double(cfg.learn.gamma) << "\n";
    o << "learn.lr = " << fmt_double(cfg.learn.lr) << "\n";
    o << "learn.momentum = " << fmt_double(cfg.learn.momentum) << "\n";
    o << "learn.batch = " << cfg.learn.batch << "\n";
    o << "learn.buffer_capacity = " << cfg.learn.buffer_capacity << "\n";
    o << "learn.priority_alpha = " << fmt_double(cfg.learn.priority_alpha) << "\n";
    o << "learn.is_beta = " << fmt_double(cfg.learn.is_beta) << "\n";
    o << "learn.target_sync_every = " << cfg.learn.target_sync_every << "\n";
    o << "learn.warmup = " << cfg.learn.warmup << "\n";
    o << "learn.eps_start = " << fmt_double(cfg.learn.eps_start) << "\n";
    o << "learn.eps_end = " << fmt_double(cfg.learn.eps_end) << "\n";
    o << "learn.eps_decay_steps = " << cfg.learn.eps_decay_steps << "\n";
    o << "learn.epochs = " << cfg.learn.epochs << "\n";
    o << "learn.invert_local_reward = " << (cfg.learn.invert_local_reward ? "true" : "false")
      << "\n";
    return o.str();
}

} // namespace cxflow
