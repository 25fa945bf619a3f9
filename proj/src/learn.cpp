#include "cxflow/learn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cxflow/config.hpp"
#include "cxflow/perception.hpp"
#include "cxflow/runner.hpp"

namespace cxflow {

double reward(Action action, double own_dir_w_next, bool conflict, const RewardParams& p,
              bool invert_local) {
    double w_hat = std::clamp(own_dir_w_next / p.w_max, 0.0, 1.0);
    double r_local = action == Action::Stop ? -w_hat : w_hat;
    if (invert_local) r_local = -r_local;
    double p_c = conflict ? -1.0 : 0.0;
    return p.lambda_l * r_local + p_c;
}

double epsilon_at(const LearnConfig& cfg, long long decisions) {
    if (decisions >= cfg.eps_decay_steps) return cfg.eps_end;
    double t = static_cast<double>(decisions) / static_cast<double>(cfg.eps_decay_steps);
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * t;
}

Action act(const nn::Mlp& net, const std::vector<double>& obs, double epsilon, Rng& rng,
           bool* exploratory, double* q_out) {
    if (exploratory) *exploratory = false;
    if (rng.uniform() < epsilon) {
        if (exploratory) *exploratory = true;
        return rng.uniform_int(2) == 0 ? Action::Stop : Action::Go;
    }
    std::vector<double> q = nn::forward(net, obs);
    if (q_out) {
        q_out[0] = q[0];
        q_out[1] = q[1];
    }
    // exact ties resolve to Stop
    return q[1] > q[0] ? Action::Go : Action::Stop;
}

TdResult td_loss(const SampledBatch& batch, const nn::Mlp& online, const nn::Mlp& target,
                 const LearnConfig& cfg, nn::Grads& grads) {
    const int B = static_cast<int>(batch.items.size());
    if (B == 0) throw std::invalid_argument("td_loss: empty batch");
    const int in = online.input_dim();

    std::vector<double> X(static_cast<size_t>(B) * in);
    std::vector<double> Xn(static_cast<size_t>(B) * in);
    for (int b = 0; b < B; ++b) {
        const Transition& t = *batch.items[b];
        if (static_cast<int>(t.obs.size()) != in)
            throw std::invalid_argument("td_loss: transition width does not match the network");
        for (int i = 0; i < in; ++i) X[static_cast<size_t>(b) * in + i] = t.obs[i];
        if (!t.next_obs.empty())
            for (int i = 0; i < in; ++i) Xn[static_cast<size_t>(b) * in + i] = t.next_obs[i];
    }

    nn::ForwardCache cache;
    std::vector<double> q(static_cast<size_t>(B) * 2);
    nn::forward_batch(online, X.data(), B, q.data(), &cache);
    std::vector<double> qn_online(static_cast<size_t>(B) * 2);
    nn::forward_batch(online, Xn.data(), B, qn_online.data());
    std::vector<double> qn_target(static_cast<size_t>(B) * 2);
    nn::forward_batch(target, Xn.data(), B, qn_target.data());

    TdResult res;
    res.td_errors.resize(B);
    std::vector<double> dY(static_cast<size_t>(B) * 2, 0.0);
    double loss = 0.0;
    for (int b = 0; b < B; ++b) {
        const Transition& t = *batch.items[b];
        int a = t.action == Action::Go ? 1 : 0;
        // online net picks the next action, target net evaluates it
        int a_next = qn_online[b * 2 + 1] > qn_online[b * 2 + 0] ? 1 : 0;
        double y = t.reward + t.discount_next * qn_target[b * 2 + a_next];
        double delta = q[b * 2 + a] - y;
        double w = batch.is_weights.empty() ? 1.0 : batch.is_weights[b];
        loss += w * delta * delta;
        res.td_errors[b] = delta;
        dY[b * 2 + a] = 2.0 * w * delta / B;
    }
    res.loss = loss / B;

    grads.zero();
    nn::backward_batch(online, cache, dY.data(), B, grads);
    return res;
}

TrainOutcome train(const ScenarioConfig& scenario, const LearnConfig& cfg,
                   RunLog* first_epoch_log) {
    ScenarioConfig base = scenario;
    base.controller = ControllerType::Policy;
    base.learn = cfg;

    int obs_len = observation_length(base.mode);
    Rng init_rng = substream(base.seed, "net_init");
    nn::Mlp online = nn::make_value_network(obs_len, init_rng);
    nn::Mlp target = online;
    nn::Grads grads, velocity;
    grads.init_like(online);
    velocity.init_like(online);

    PrioritizedReplay buffer(static_cast<size_t>(cfg.buffer_capacity), cfg.priority_alpha);
    Rng replay_rng = substream(base.seed, "replay");
    RewardParams rp;

    TrainOutcome out;
    long long decisions = 0;
    long long updates = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        ScenarioConfig ep_cfg = base;
        ep_cfg.seed = base.seed + static_cast<uint64_t>(epoch);
        LogLevel level = (epoch == 0 && first_epoch_log) ? LogLevel::Full : LogLevel::None;
        ScenarioRuntime rt(ep_cfg, ep_cfg.seed, level, &online);
        rt.set_transition_sink([&](CompletedTransition&& ct) {
            Transition t;
            t.obs.assign(ct.obs.begin(), ct.obs.end());
            t.next_obs.assign(ct.next_obs.begin(), ct.next_obs.end());
            if (t.next_obs.empty()) t.next_obs.assign(ct.obs.size(), 0.0f);
            t.action = ct.action;
            t.reward = ct.reward;
            t.discount_next = ct.terminal ? 0.0 : cfg.gamma;
            buffer.add(std::move(t));
        });

        DecideFn decide = [&](const std::vector<DecisionQuery>& queries) {
            std::vector<DecisionAnswer> answers(queries.size());
            for (size_t i = 0; i < queries.size(); ++i) {
                double eps = epsilon_at(cfg, decisions);
                bool exploring = false;
                answers[i].action =
                    act(online, queries[i].obs, eps, rt.explore_rng(), &exploring);
                answers[i].exploratory = exploring;
                ++decisions;
            }
            return answers;
        };

        while (rt.advance(decide)) {
            if (buffer.size() >= static_cast<size_t>(cfg.warmup) &&
                buffer.size() >= static_cast<size_t>(cfg.batch)) {
                SampledBatch batch = buffer.sample(cfg.batch, cfg.is_beta, replay_rng);
                TdResult td = td_loss(batch, online, target, cfg, grads);
                nn::sgd_momentum(online, grads, velocity, cfg.lr, cfg.momentum);
                buffer.update_priorities(batch.indices, td.td_errors);
                if (++updates % cfg.target_sync_every == 0) target = online;
            }
            if (rt.congestion_triggered()) break; // sustained standstill, episode over
        }
        rt.finish_episode();
        if (epoch == 0 && first_epoch_log) *first_epoch_log = rt.log();

        out.curves.cumulative_wait.push_back(rt.cumulative_wait());
        out.curves.conflicts.push_back(rt.conflict_decisions());
        out.curves.epsilon.push_back(epsilon_at(cfg, decisions));
    }

    out.policy = std::move(online);
    return out;
}

} // namespace cxflow
