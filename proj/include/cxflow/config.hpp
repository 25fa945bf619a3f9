#pragma once

#include <map>
#include <string>
#include <vector>

#include "cxflow/comms.hpp"
#include "cxflow/control.hpp"
#include "cxflow/demand.hpp"
#include "cxflow/geometry.hpp"
#include "cxflow/learn.hpp"

namespace cxflow {

enum class ControllerType : uint8_t { TL, NoTL, Policy };
enum class StatsSource : uint8_t { GroundTruth, V2V };

struct ScenarioConfig {
    // intersection
    int mode = 8;
    std::array<bool, 4> legs = {true, true, true, true}; // N,E,S,W
    int lanes_per_movement = 1;
    std::map<std::string, int> lanes_override;
    double approach_length = 100.0;
    double control_zone_radius = 30.0;
    double lane_width = 4.0;
    double box_side = 0.0;

    // demand
    ArrivalModel arrival_model = ArrivalModel::Poisson;
    double count_default = 120.0;
    std::map<std::string, double> count_override; // per stream name
    double rv_rate = 1.0;

    // controller
    ControllerType controller = ControllerType::NoTL;
    std::string checkpoint;
    StatsSource stats_source = StatsSource::GroundTruth;
    double policy_epsilon = 0.0;
    bool resolution = true;

    // fixed-time plan (empty phases -> default protected-left plan)
    std::vector<std::string> tl_phases; // e.g. "N-C+S-C"
    double tl_green = 30.0, tl_yellow = 3.0, tl_all_red = 2.0;

    // communication
    bool comm_enabled = false;
    CommConfig comm;

    std::vector<EventSpec> events;

    // run
    int horizon = 1000;
    uint64_t seed = 1;
    int repeats = 1;

    // metrics
    WaitMode wait_mode = WaitMode::Accumulated;
    int slope_window = 500;
    double cl_threshold = 46.5;

    double validate_window = 7200.0;

    LearnConfig learn;

    IntersectionSpec intersection_spec() const;
    DemandProfile demand_profile() const; // counts expanded per canonical slot
};

// Strict dotted-key parser: one `key = value` per line, `#` comments. Unknown
// keys, type mismatches and range violations raise errors naming the key and
// line.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

// Every effective value in the same grammar; parsing it back reproduces the
// config exactly.
std::string serialize_manifest(const ScenarioConfig& cfg);

extern const char* kVersion;

} // namespace cxflow
