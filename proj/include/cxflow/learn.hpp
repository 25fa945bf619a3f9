#pragma once

#include <string>
#include <vector>

#include "cxflow/metrics.hpp"
#include "cxflow/nn.hpp"
#include "cxflow/replay.hpp"
#include "cxflow/rng.hpp"

namespace cxflow {

struct RewardParams {
    double lambda_l = 1.0;
    double w_max = 200.0;
};

struct LearnConfig {
    double gamma = 0.99;
    double lr = 0.0005;
    double momentum = 0.9;
    int batch = 32;
    int buffer_capacity = 50000;
    double priority_alpha = 0.5;
    double is_beta = 0.4;
    int target_sync_every = 500; // updates
    int warmup = 1000;           // transitions before learning starts
    double eps_start = 1.0;
    double eps_end = 0.05;
    int eps_decay_steps = 50000; // decisions
    int epochs = 100;
    bool invert_local_reward = false; // flip the sign convention of the local term
};

// Conflict-aware reward: r = lambda_L * r_L + p_c with r_L = -w_hat on Stop
// and +w_hat on Go (w_hat = clamp(w/w_max, 0, 1)), p_c = -1 on a conflicting
// decision. Always in [-2, 1] with the default parameters.
double reward(Action action, double own_dir_w_next, bool conflict, const RewardParams& p,
              bool invert_local = false);

// epsilon in the decision-count schedule
double epsilon_at(const LearnConfig& cfg, long long decisions);

// Epsilon-greedy action; exact q ties resolve to Stop. Sets *exploratory when
// the random branch fired.
Action act(const nn::Mlp& net, const std::vector<double>& obs, double epsilon, Rng& rng,
           bool* exploratory = nullptr, double* q_out = nullptr);

struct TdResult {
    double loss = 0.0;
    std::vector<double> td_errors; // per sample, for priority updates
};

// Double-DQN squared TD error: the online network picks argmax over the next
// observation, the target network evaluates it. Gradients (accumulated into
// `grads`, which is zeroed here) flow through the online network only;
// samples are weighted by the importance weights.
TdResult td_loss(const SampledBatch& batch, const nn::Mlp& online, const nn::Mlp& target,
                 const LearnConfig& cfg, nn::Grads& grads);

struct TrainingCurves {
    std::vector<double> cumulative_wait; // per epoch, seconds of accrued waiting
    std::vector<long long> conflicts;    // conflicting decisions per epoch
    std::vector<double> epsilon;         // at epoch end
};

struct ScenarioConfig; // defined in config.hpp

struct TrainOutcome {
    nn::Mlp policy;
    TrainingCurves curves;
};

// Centralized training with a shared policy: every in-zone RV queries the
// network each second, all transitions share one prioritized buffer, one
// gradient update per environment step after warmup. Episodes end at the
// horizon or on sustained congestion. When first_epoch_log is given, the
// first episode is logged in full (decision, reward and snapshot records).
TrainOutcome train(const ScenarioConfig& scenario, const LearnConfig& cfg,
                   RunLog* first_epoch_log = nullptr);

} // namespace cxflow
