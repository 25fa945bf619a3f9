#pragma once

#include <map>
#include <optional>
#include <vector>

#include "cxflow/perception.hpp"
#include "cxflow/rng.hpp"
#include "cxflow/world.hpp"

namespace cxflow {

enum class CommProtocol : uint8_t { LongRange, ShortRange };

struct CommConfig {
    CommProtocol protocol = CommProtocol::LongRange;
    double long_range_radius = 150.0; // m, one hop
    double hop_range = 50.0;          // m per hop
    int max_hops = 3;
    double per = 0.0;                 // packet error rate per hop
};

struct CommMessage {
    int sender = -1;
    int stream = -1;
    double pos = 0.0;   // distance to the intersection, m
    double ego_w = 0.0; // s
    double ego_l = 0.0; // vehicles
};

// Hop count per ordered (sender, receiver) pair of controlled in-zone RVs;
// pairs that cannot be linked are absent. Long range: one hop when both are
// within the radius of the intersection center. Short range: direction
// clusters with the front-most RV as master, slave -> master -> master ->
// slave, every hop limited to hop_range.
using LinkTable = std::map<std::pair<int, int>, int>;

LinkTable build_links(const World& world, const CommConfig& cfg);

// Messages from stopped in-zone RVs this step.
std::vector<CommMessage> collect_messages(const World& world);

// Independent per-(message, receiver) delivery with success probability
// (1-per)^hops. A sender always receives its own message.
std::map<int, std::vector<CommMessage>> deliver(const std::vector<CommMessage>& messages,
                                                const std::vector<int>& receivers,
                                                const LinkTable& links, double per, Rng& rng);

// Per-direction estimates from received messages: queue length is the
// maximum reported ego_l (the farthest stopped RV bounds the queue), waiting
// time the mean of reported ego_w; (0,0) without messages.
std::vector<StreamStats> aggregate_estimates(const std::vector<CommMessage>& received,
                                             int slots);

// Relative estimation error in percent; 0 when both values are 0, empty when
// only the actual value is 0 (excluded from averages).
std::optional<double> estimation_error(double actual, double estimated);

} // namespace cxflow
