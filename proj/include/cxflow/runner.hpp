#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "cxflow/checkpoint.hpp"
#include "cxflow/config.hpp"
#include "cxflow/demand.hpp"
#include "cxflow/metrics.hpp"
#include "cxflow/world.hpp"

namespace cxflow {

struct DecisionQuery {
    int vehicle;
    int stream;
    bool is_front;
    std::vector<double> obs;
};

struct DecisionAnswer {
    Action action = Action::Stop;
    bool exploratory = false;
};

using DecideFn = std::function<std::vector<DecisionAnswer>(const std::vector<DecisionQuery>&)>;

struct CompletedTransition {
    std::vector<double> obs;
    std::vector<double> next_obs; // empty on terminal
    Action action = Action::Stop;
    double reward = 0.0;
    bool terminal = false;
};

using TransitionSink = std::function<void(CompletedTransition&&)>;

// One seeded rollout of a scenario: demand, control, communication, events,
// logging. Drives the world step by step; the policy (when any controller
// needs one) is queried through the DecideFn.
class ScenarioRuntime {
public:
    ScenarioRuntime(const ScenarioConfig& cfg, uint64_t seed, LogLevel level,
                    const nn::Mlp* policy = nullptr);

    void set_transition_sink(TransitionSink sink) { sink_ = std::move(sink); }

    // Advances one step; returns false once the horizon is reached.
    bool advance(const DecideFn& decide);

    // Runs to the horizon (optionally stopping on sustained congestion).
    void run_all(const DecideFn& decide, bool stop_on_congestion = false);

    // Completes still-pending transitions as terminal (episode end).
    void finish_episode();

    World& world() { return world_; }
    const World& world() const { return world_; }
    const RunLog& log() const { return log_; }
    const ScenarioConfig& cfg() const { return cfg_; }
    Rng& explore_rng() { return rng_explore_; }
    ControllerType active_controller() const { return active_; }

    long long conflict_event_count() const { return conflict_events_; }
    long long safety_event_count() const { return safety_events_; }
    bool grant_check_failed() const { return grant_check_failed_; }
    double cumulative_wait() const { return cumulative_wait_; }
    long long conflict_decisions() const { return conflict_decisions_; }
    long long total_decisions() const { return total_decisions_; }
    long long exits() const { return exits_; }
    bool congestion_triggered() const { return congestion_streak_ >= kCongestionSteps; }
    long long scheduled() const { return spawner_.scheduled_so_far(); }
    long long spawned() const { return spawner_.spawned_total(); }
    long long backlog() const { return spawner_.backlog_size(); }

private:
    ScenarioConfig cfg_;
    std::shared_ptr<const Intersection> geo_;
    World world_;
    Spawner spawner_;
    PhasePlan plan_;
    const nn::Mlp* policy_;
    RunLog log_;
    TransitionSink sink_;

    Rng rng_kinds_, rng_comms_, rng_explore_, rng_events_;
    ControllerType active_;
    bool drop_active_ = false;
    double drop_conv_p_ = 0.0;
    size_t next_event_ = 0;
    bool check_grants_ = false;

    struct Pending {
        std::vector<double> obs;
        Action action = Action::Stop;
        bool conflict = false;
        double reward = 0.0;
        bool has_reward = false;
    };
    std::map<int, Pending> pending_;

    long long conflict_events_ = 0;
    long long safety_events_ = 0;
    long long conflict_decisions_ = 0;
    long long total_decisions_ = 0;
    long long exits_ = 0;
    double cumulative_wait_ = 0.0;
    int congestion_streak_ = 0;
    bool grant_check_failed_ = false;
};

// Greedy (epsilon from the config) decision function over a value network.
DecideFn policy_decide_fn(const nn::Mlp& net, double epsilon, Rng& rng);

struct RolloutSummary {
    double awt = 0.0;
    std::optional<double> conflict_rate;
    double throughput = 0.0; // vehicles/hour
    double avg_speed = 0.0;
    bool congested = false;
    double awt_slope = 0.0;
    std::vector<double> post_event_slopes; // one per scenario event
};

struct EvalResult {
    std::vector<RolloutSummary> rollouts;
};

// `repeats` rollouts with derived seeds (seed, seed+1, ...); writes
// manifest.txt, rollout_<k>.csv, events_<k>.csv and summary.csv under out_dir
// (no files when out_dir is empty).
EvalResult run_eval(const ScenarioConfig& cfg, const std::string& out_dir,
                    LogLevel level = LogLevel::Full);

enum class SweepAxis : uint8_t { Demand, RvRate, Per };

struct SweepRow {
    double value;
    double awt;
    bool congested;
    double avg_speed;
};

std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, SweepAxis axis,
                                const std::vector<double>& values, const std::string& out_dir);

// run_eval plus event markers and post-event AWT slopes in the summary.
EvalResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir);

// Rolls the configured scenario long enough to cover the validation window
// and reports per-stream GEH against the configured counts.
GehReport run_validate_demand(const ScenarioConfig& cfg, const std::string& out_dir);

// per-step metrics row formatting (shared with tests pinning the header)
std::string rollout_csv_header(int mode, bool with_event);
std::string rollout_csv_row(const RunLog& log, int step, int mode, double cl_threshold,
                            long long cum_exits, long long cum_decisions,
                            long long cum_conflicts, bool with_event);

} // namespace cxflow
