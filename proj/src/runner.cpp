#include "cxflow/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cxflow/comms.hpp"
#include "cxflow/learn.hpp"
#include "cxflow/perception.hpp"

namespace cxflow {

namespace {

namespace fs = std::filesystem;

PhasePlan build_plan(const ScenarioConfig& cfg, const Intersection& geo) {
    if (cfg.tl_phases.empty()) {
        PhasePlan plan = default_phase_plan(geo);
        for (Phase& p : plan.phases) {
            p.green = cfg.tl_green;
            p.yellow = cfg.tl_yellow;
            p.all_red = cfg.tl_all_red;
        }
        plan.validate(geo);
        return plan;
    }
    PhasePlan plan;
    for (const std::string& spec : cfg.tl_phases) {
        uint32_t mask = 0;
        std::stringstream ss(spec);
        std::string name;
        while (std::getline(ss, name, '+')) {
            int idx = canonical_index(parse_stream(name), geo.mode());
            if (idx < 0) throw std::invalid_argument("tl.phases: stream " + name +
                                                     " not present in this mode");
            mask |= 1u << idx;
        }
        plan.phases.push_back({mask, cfg.tl_green, cfg.tl_yellow, cfg.tl_all_red});
    }
    plan.validate(geo);
    return plan;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

} // namespace

ScenarioRuntime::ScenarioRuntime(const ScenarioConfig& cfg, uint64_t seed, LogLevel level,
                                 const nn::Mlp* policy)
    : cfg_(cfg),
      geo_(std::make_shared<Intersection>(build_intersection(cfg.intersection_spec()))),
      world_(geo_),
      spawner_([&] {
          Rng demand_rng = substream(seed, "demand");
          return Spawner(arrivals(cfg.demand_profile(), cfg.horizon * world_.dt(), demand_rng),
                         cfg.demand_profile());
      }()),
      plan_(build_plan(cfg, *geo_)),
      policy_(policy),
      rng_kinds_(substream(seed, "kinds")),
      rng_comms_(substream(seed, "comms")),
      rng_explore_(substream(seed, "explore")),
      rng_events_(substream(seed, "events")),
      active_(cfg.controller) {
    log_.level = level;
    log_.mode = cfg.mode;

    bool needs_policy = cfg.controller == ControllerType::Policy;
    for (const EventSpec& ev : cfg_.events) {
        if (ev.kind == EventKind::Blackout) {
            if (cfg.controller != ControllerType::TL)
                throw std::invalid_argument("blackout events require the TL controller");
            if (ev.successor == SuccessorKind::Policy) needs_policy = true;
        } else {
            if (ev.target_rate > cfg.rv_rate + 1e-12)
                throw std::invalid_argument("rv_drop target_rate exceeds the configured rv_rate");
        }
    }
    if (needs_policy) {
        if (!policy_) throw std::invalid_argument("scenario needs a policy checkpoint");
        if (policy_->input_dim() != observation_length(cfg.mode))
            throw std::invalid_argument("checkpoint does not match the intersection mode");
    }
    bool has_drop = std::any_of(cfg_.events.begin(), cfg_.events.end(), [](const EventSpec& e) {
        return e.kind == EventKind::RvDrop;
    });
    check_grants_ = cfg.rv_rate >= 1.0 && !has_drop;
}

bool ScenarioRuntime::advance(const DecideFn& decide) {
    if (world_.step_count() >= cfg_.horizon) return false;
    const int t = world_.step_count();
    StepRecord rec;
    rec.step = t;

    // scenario events due this step
    while (next_event_ < cfg_.events.size() && cfg_.events[next_event_].at_step == t) {
        const EventSpec& ev = cfg_.events[next_event_];
        if (ev.kind == EventKind::Blackout) {
            active_ = ev.successor == SuccessorKind::Policy ? ControllerType::Policy
                                                            : ControllerType::NoTL;
            rec.events.push_back({EventType::Scenario, -1, -1, "blackout"});
        } else {
            drop_active_ = true;
            drop_conv_p_ = cfg_.rv_rate > 0.0 ? (cfg_.rv_rate - ev.target_rate) / cfg_.rv_rate : 0.0;
            for (Vehicle& v : world_.vehicles_mut())
                if (v.kind == VehicleKind::RV && v.controlled &&
                    rng_events_.bernoulli(drop_conv_p_))
                    v.controlled = false;
            rec.events.push_back({EventType::Scenario, -1, -1, "rv_drop"});
        }
        ++next_event_;
    }

    // demand release; offline conversion applies to future RVs as well
    std::vector<int> spawned = spawner_.step(world_, rng_kinds_, rec.events);
    if (drop_active_) {
        for (int id : spawned) {
            Vehicle* v = world_.find(id);
            if (v->kind == VehicleKind::RV && rng_events_.bernoulli(drop_conv_p_))
                v->controlled = false;
        }
    }

    // ground-truth stats at decision time (reward bookkeeping and priorities)
    std::vector<StreamStats> stats = all_ground_truth_stats(world_);

    std::vector<DecisionQuery> queries;
    std::vector<DecisionAnswer> answers;
    if (active_ == ControllerType::Policy) {
        std::vector<const Vehicle*> deciders;
        for (const Vehicle& v : world_.vehicles())
            if (v.is_controlled_rv() && v.zone == VehicleZone::ControlZone && !v.entry_granted)
                deciders.push_back(&v);

        bool v2v = cfg_.stats_source == StatsSource::V2V && cfg_.comm_enabled;
        std::map<int, std::vector<StreamStats>> v2v_stats;
        if (v2v && !deciders.empty()) {
            auto msgs = collect_messages(world_);
            auto links = build_links(world_, cfg_.comm);
            std::vector<int> receivers;
            receivers.reserve(deciders.size());
            for (const Vehicle* v : deciders) receivers.push_back(v->id);
            auto inbox = deliver(msgs, receivers, links, cfg_.comm.per, rng_comms_);
            for (const Vehicle* v : deciders)
                v2v_stats[v->id] = aggregate_estimates(inbox[v->id], geo_->slot_count());
        }
        for (const Vehicle* v : deciders) {
            const std::vector<StreamStats>& st = v2v ? v2v_stats[v->id] : stats;
            queries.push_back(
                {v->id, v->stream, world_.is_lane_front(*v), encode_observation(world_, *v, st).values});
        }

        // a fresh observation completes the previous transition of this RV
        for (const DecisionQuery& q : queries) {
            auto it = pending_.find(q.vehicle);
            if (it != pending_.end() && it->second.has_reward) {
                if (sink_)
                    sink_({it->second.obs, q.obs, it->second.action, it->second.reward, false});
                pending_.erase(it);
            }
        }

        answers = decide(queries);
        if (answers.size() != queries.size())
            throw std::logic_error("decision function returned a mismatched answer count");

        // conflict predicate over the raw outputs, before resolution
        uint32_t inside_mask = 0;
        for (const Vehicle& v : world_.vehicles())
            if (v.zone == VehicleZone::Inside) inside_mask |= 1u << v.stream;
        uint32_t front_go_mask = 0;
        for (size_t i = 0; i < queries.size(); ++i)
            if (queries[i].is_front && answers[i].action == Action::Go)
                front_go_mask |= 1u << queries[i].stream;

        for (size_t i = 0; i < queries.size(); ++i) {
            const DecisionQuery& q = queries[i];
            bool conflict = false;
            if (answers[i].action == Action::Go) {
                // a stream never conflicts with itself, so the ego's own
                // front-Go bit cannot fire this test
                conflict = (geo_->conflict_mask(q.stream) & inside_mask) != 0 ||
                           (geo_->conflict_mask(q.stream) & front_go_mask) != 0;
            }
            rec.decisions.push_back(
                {q.vehicle, q.stream, answers[i].action, q.is_front, conflict,
                 answers[i].exploratory});
            Pending p;
            p.obs = q.obs;
            p.action = answers[i].action;
            p.conflict = conflict;
            pending_[q.vehicle] = std::move(p);
            ++total_decisions_;
            if (conflict && answers[i].action == Action::Go) ++conflict_decisions_;
            Vehicle* v = world_.find(q.vehicle);
            v->current_action = answers[i].action;
        }

        // conflict-resolution gate
        if (cfg_.resolution) {
            rec.grants = resolve_conflicts(world_, rec.decisions, stats);
        } else {
            for (const DecisionRecord& d : rec.decisions) {
                if (!d.front || d.action != Action::Go) continue;
                Vehicle* v = world_.find(d.vehicle);
                if (v && !v->entry_granted && std::abs(v->s) < 0.5) {
                    v->entry_granted = true;
                    rec.grants.push_back(d.vehicle);
                }
            }
        }
    }

    // commanded accelerations for controlled in-zone RVs: granted vehicles
    // commit to Go, denied front candidates hold as Stop for this step, and
    // everyone else executes its raw decision (the entrance line still gates)
    StepInput input;
    if (active_ == ControllerType::Policy) {
        std::map<int, Action> decided;
        for (const DecisionRecord& d : rec.decisions) decided[d.vehicle] = d.action;
        for (const Vehicle& v : world_.vehicles()) {
            if (!v.is_controlled_rv() || v.zone != VehicleZone::ControlZone) continue;
            Action eff;
            if (v.entry_granted) {
                eff = Action::Go;
            } else {
                auto it = decided.find(v.id);
                eff = it != decided.end() ? it->second : Action::Stop;
                if (eff == Action::Go && std::abs(v.s) < 0.5) eff = Action::Stop; // held
            }
            input.commands[v.id] = actuation(eff, v, world_);
        }
    }

    // entrance permissions
    if (active_ == ControllerType::TL) {
        uint32_t green = tl_controller(plan_, *geo_, world_.time());
        for (const Vehicle& v : world_.vehicles())
            if (v.s <= 0.0 && (green >> v.stream & 1u)) input.may_cross.insert(v.id);
    } else {
        for (const Vehicle& v : world_.vehicles()) {
            if (v.s > 0.0 || v.entry_granted) continue;
            bool uncontrolled = active_ == ControllerType::NoTL || !v.is_controlled_rv();
            if (!uncontrolled) continue;
            if (!world_.is_lane_front(v)) continue;
            if (notl_entry_rule(world_, v)) input.may_cross.insert(v.id);
        }
    }

    StepResult sr = world_.step(input);
    for (EventRecord& e : sr.events) {
        if (e.type == EventType::Exit) ++exits_;
        if (e.type == EventType::Conflict) ++conflict_events_;
        if (e.type == EventType::Safety) ++safety_events_;
        rec.events.push_back(std::move(e));
    }

    // rewards for this step's decisions use the post-step waiting times
    if (!rec.decisions.empty()) {
        std::vector<StreamStats> stats_after = all_ground_truth_stats(world_);
        RewardParams rp;
        for (const DecisionRecord& d : rec.decisions) {
            Pending& p = pending_[d.vehicle];
            p.reward = reward(d.action, stats_after[d.stream].avg_wait, p.conflict, rp,
                              cfg_.learn.invert_local_reward);
            p.has_reward = true;
            rec.rewards.push_back({d.vehicle, t, d.action, p.conflict, p.reward});
        }
    }

    // transitions with no further decision terminate here
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (!it->second.has_reward) {
            ++it;
            continue;
        }
        const Vehicle* v = world_.find(it->first);
        bool terminal = !v || v->entry_granted || !v->is_controlled_rv() ||
                        v->zone != VehicleZone::ControlZone;
        if (terminal) {
            if (sink_) sink_({it->second.obs, {}, it->second.action, it->second.reward, true});
            it = pending_.erase(it);
        } else {
            ++it;
        }
    }

    if (check_grants_ && active_ == ControllerType::Policy && cfg_.resolution &&
        !grant_set_sound(world_))
        grant_check_failed_ = true;

    // step accounting
    double speed_sum = 0.0;
    int speed_n = 0;
    for (const Vehicle& v : world_.vehicles()) {
        if (v.zone == VehicleZone::ControlZone && v.v < kStillSpeed)
            cumulative_wait_ += world_.dt();
        if (v.zone == VehicleZone::ControlZone || v.zone == VehicleZone::Inside) {
            speed_sum += v.v;
            ++speed_n;
        }
    }
    if (speed_n > 0 && speed_sum / speed_n < kCongestionSpeed) ++congestion_streak_;
    else congestion_streak_ = 0;

    if (log_.level != LogLevel::None) {
        if (log_.level == LogLevel::Full) rec.vehicles = world_.snapshot();
        log_.steps.push_back(std::move(rec));
    }
    return true;
}

void ScenarioRuntime::run_all(const DecideFn& decide, bool stop_on_congestion) {
    while (advance(decide)) {
        if (stop_on_congestion && congestion_triggered()) break;
    }
}

void ScenarioRuntime::finish_episode() {
    for (auto& [id, p] : pending_) {
        if (!p.has_reward) continue; // never stepped after the decision
        if (sink_) sink_({p.obs, {}, p.action, p.reward, true});
    }
    pending_.clear();
}

DecideFn policy_decide_fn(const nn::Mlp& net, double epsilon, Rng& rng) {
    return [&net, epsilon, &rng](const std::vector<DecisionQuery>& queries) {
        std::vector<DecisionAnswer> out(queries.size());
        for (size_t i = 0; i < queries.size(); ++i) {
            bool exploring = false;
            out[i].action = act(net, queries[i].obs, epsilon, rng, &exploring);
            out[i].exploratory = exploring;
        }
        return out;
    };
}

std::string rollout_csv_header(int mode, bool with_event) {
    std::ostringstream o;
    o << "step,awt_intersection";
    const auto& order = canonical_streams(mode);
    for (const StreamId& s : order) o << ",awt_" << stream_name(s);
    o << ",avg_speed,throughput,conflict_rate_cum";
    for (const StreamId& s : order) o << ",cl_" << stream_name(s);
    if (with_event) o << ",event";
    return o.str();
}

std::string rollout_csv_row(const RunLog& log, int step, int mode, double cl_threshold,
                            long long cum_exits, long long cum_decisions,
                            long long cum_conflicts, bool with_event) {
    const StepRecord& rec = log.steps[step];
    std::ostringstream o;
    o << step;

    double sum = 0.0;
    int n = 0;
    std::vector<double> dir_sum(mode, 0.0);
    std::vector<int> dir_n(mode, 0);
    double speed_sum = 0.0;
    for (const VehicleSnap& v : rec.vehicles) {
        if (v.zone != VehicleZone::ControlZone && v.zone != VehicleZone::Inside) continue;
        sum += v.wait_accum;
        speed_sum += v.v;
        ++n;
        if (v.stream >= 0 && v.stream < mode) {
            dir_sum[v.stream] += v.wait_accum;
            ++dir_n[v.stream];
        }
    }
    o << "," << fmt(n > 0 ? sum / n : 0.0);
    for (int j = 0; j < mode; ++j) o << "," << fmt(dir_n[j] > 0 ? dir_sum[j] / dir_n[j] : 0.0);
    o << "," << fmt(n > 0 ? speed_sum / n : 0.0);
    double elapsed = (step + 1) * 1.0;
    o << "," << fmt(static_cast<double>(cum_exits) * 3600.0 / elapsed);
    o << ","
      << fmt(cum_decisions > 0
                 ? static_cast<double>(cum_conflicts) / static_cast<double>(cum_decisions)
                 : 0.0);
    for (int j = 0; j < mode; ++j)
        o << "," << fmt(congestion_level(dir_n[j] > 0 ? dir_sum[j] / dir_n[j] : 0.0, cl_threshold));
    if (with_event) {
        o << ",";
        bool first = true;
        for (const EventRecord& e : rec.events) {
            if (e.type != EventType::Scenario) continue;
            if (!first) o << ";";
            o << e.tag;
            first = false;
        }
    }
    return o.str();
}

namespace {

std::string build_rollout_csv(const RunLog& log, int mode, double cl_threshold,
                              bool with_event) {
    std::ostringstream o;
    o << rollout_csv_header(mode, with_event) << "\n";
    long long exits = 0, decisions = 0, conflicts = 0;
    for (size_t t = 0; t < log.steps.size(); ++t) {
        for (const EventRecord& e : log.steps[t].events)
            if (e.type == EventType::Exit) ++exits;
        for (const DecisionRecord& d : log.steps[t].decisions) {
            ++decisions;
            if (d.conflict && d.action == Action::Go) ++conflicts;
        }
        o << rollout_csv_row(log, static_cast<int>(t), mode, cl_threshold, exits, decisions,
                             conflicts, with_event)
          << "\n";
    }
    return o.str();
}

const char* event_name(EventType t) {
    switch (t) {
    case EventType::Spawn: return "spawn";
    case EventType::Enter: return "enter";
    case EventType::Exit: return "exit";
    case EventType::Conflict: return "conflict";
    case EventType::Safety: return "safety";
    case EventType::Scenario: return "scenario";
    }
    return "?";
}

std::string build_events_csv(const RunLog& log, int mode) {
    std::ostringstream o;
    o << "step,type,vehicle,stream,tag\n";
    const auto& order = canonical_streams(mode);
    for (const StepRecord& rec : log.steps) {
        for (const EventRecord& e : rec.events) {
            o << rec.step << "," << event_name(e.type) << "," << e.vehicle << ",";
            if (e.stream >= 0 && e.stream < static_cast<int>(order.size()))
                o << stream_name(order[e.stream]);
            o << "," << e.tag << "\n";
        }
    }
    return o.str();
}

RolloutSummary summarize(const ScenarioRuntime& rt) {
    const ScenarioConfig& cfg = rt.cfg();
    const RunLog& log = rt.log();
    RolloutSummary s;
    int n = static_cast<int>(log.steps.size());
    if (log.has_snapshots()) {
        s.awt = awt(log, AwtScope::Intersection, -1, 0, n, cfg.wait_mode).value;
        auto series = awt_series(log);
        s.awt_slope = slope_tail(series, cfg.slope_window);
        for (const EventSpec& ev : cfg.events) {
            std::vector<double> post(series.begin() + std::min(ev.at_step, n), series.end());
            s.post_event_slopes.push_back(slope_tail(post, static_cast<int>(post.size())));
        }
        s.congested = congested(log, 0, n);
        double sp = 0.0;
        int spn = 0;
        for (int t = 0; t < n; ++t) {
            auto v = avg_speed_at(log, t);
            if (v) {
                sp += *v;
                ++spn;
            }
        }
        s.avg_speed = spn > 0 ? sp / spn : 0.0;
    }
    s.conflict_rate = conflict_rate(log, 0, n);
    s.throughput = static_cast<double>(rt.exits()) * 3600.0 / (cfg.horizon * 1.0);
    return s;
}

struct MeanStd {
    double mean = 0.0, sd = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    for (double x : xs) r.sd += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(r.sd / static_cast<double>(xs.size()));
    return r;
}

std::string build_summary_csv(const std::vector<RolloutSummary>& rs, bool scenario_mode) {
    std::ostringstream o;
    o << "metric,mean,std\n";
    auto emit = [&](const std::string& name, const std::vector<double>& xs) {
        MeanStd m = mean_std(xs);
        o << name << "," << fmt(m.mean) << "," << fmt(m.sd) << "\n";
    };
    std::vector<double> awt_v, cr, tp, sp, cg, slope;
    for (const RolloutSummary& r : rs) {
        awt_v.push_back(r.awt);
        if (r.conflict_rate) cr.push_back(*r.conflict_rate);
        tp.push_back(r.throughput);
        sp.push_back(r.avg_speed);
        cg.push_back(r.congested ? 1.0 : 0.0);
        slope.push_back(r.awt_slope);
    }
    emit("awt", awt_v);
    emit("conflict_rate", cr);
    emit("throughput", tp);
    emit("avg_speed", sp);
    emit("congested_fraction", cg);
    emit("awt_slope", slope);
    if (scenario_mode && !rs.empty()) {
        for (size_t e = 0; e < rs.front().post_event_slopes.size(); ++e) {
            std::vector<double> xs;
            for (const RolloutSummary& r : rs)
                if (e < r.post_event_slopes.size()) xs.push_back(r.post_event_slopes[e]);
            emit("post_event_awt_slope_" + std::to_string(e), xs);
        }
    }
    return o.str();
}

} // namespace

EvalResult run_eval(const ScenarioConfig& cfg, const std::string& out_dir, LogLevel level) {
    std::optional<Checkpoint> ck;
    const nn::Mlp* policy = nullptr;
    bool needs_policy = cfg.controller == ControllerType::Policy;
    for (const EventSpec& ev : cfg.events)
        if (ev.kind == EventKind::Blackout && ev.successor == SuccessorKind::Policy)
            needs_policy = true;
    if (needs_policy) {
        if (cfg.checkpoint.empty())
            throw std::invalid_argument("controller.checkpoint is required for policy control");
        ck = load_checkpoint(cfg.checkpoint);
        if (ck->mode != cfg.mode)
            throw std::invalid_argument("checkpoint mode does not match intersection.mode");
        policy = &ck->net;
    }

    bool scenario_mode = !cfg.events.empty();
    int repeats = cfg.repeats;
    EvalResult result;
    result.rollouts.resize(repeats);
    std::vector<std::string> rollout_csvs(repeats), event_csvs(repeats);

#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < repeats; ++k) {
        ScenarioRuntime rt(cfg, cfg.seed + static_cast<uint64_t>(k), level, policy);
        DecideFn decide;
        if (policy)
            decide = policy_decide_fn(*policy, cfg.policy_epsilon, rt.explore_rng());
        else
            decide = [](const std::vector<DecisionQuery>&) {
                return std::vector<DecisionAnswer>{};
            };
        rt.run_all(decide);
        result.rollouts[k] = summarize(rt);
        if (!out_dir.empty()) {
            if (rt.log().has_snapshots())
                rollout_csvs[k] =
                    build_rollout_csv(rt.log(), cfg.mode, cfg.cl_threshold, scenario_mode);
            event_csvs[k] = build_events_csv(rt.log(), cfg.mode);
        }
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(out_dir + "/manifest.txt", serialize_manifest(cfg));
        for (int k = 0; k < repeats; ++k) {
            if (!rollout_csvs[k].empty())
                write_file(out_dir + "/rollout_" + std::to_string(k) + ".csv", rollout_csvs[k]);
            write_file(out_dir + "/events_" + std::to_string(k) + ".csv", event_csvs[k]);
        }
        write_file(out_dir + "/summary.csv", build_summary_csv(result.rollouts, scenario_mode));
    }
    return result;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, SweepAxis axis,
                                const std::vector<double>& values,
                                const std::string& out_dir) {
    if (values.empty()) throw std::invalid_argument("run_sweep: no values");
    std::vector<SweepRow> rows;
    for (size_t i = 0; i < values.size(); ++i) {
        ScenarioConfig c = cfg;
        switch (axis) {
        case SweepAxis::Demand:
            c.count_default = values[i];
            c.count_override.clear();
            break;
        case SweepAxis::RvRate:
            c.rv_rate = values[i];
            break;
        case SweepAxis::Per:
            c.comm_enabled = true;
            c.comm.per = values[i];
            break;
        }
        std::string sub = out_dir.empty() ? "" : out_dir + "/val_" + std::to_string(i);
        EvalResult r = run_eval(c, sub);
        std::vector<double> awt_v, sp;
        int congested_n = 0;
        for (const RolloutSummary& s : r.rollouts) {
            awt_v.push_back(s.awt);
            sp.push_back(s.avg_speed);
            if (s.congested) ++congested_n;
        }
        SweepRow row;
        row.value = values[i];
        row.awt = mean_std(awt_v).mean;
        row.avg_speed = mean_std(sp).mean;
        row.congested = congested_n * 2 >= static_cast<int>(r.rollouts.size());
        rows.push_back(row);
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ostringstream o;
        o << "value,awt,congested,avg_speed\n";
        for (const SweepRow& r : rows)
            o << fmt(r.value) << "," << fmt(r.awt) << "," << (r.congested ? "true" : "false")
              << "," << fmt(r.avg_speed) << "\n";
        write_file(out_dir + "/sweep.csv", o.str());
    }
    return rows;
}

EvalResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
    if (cfg.events.empty())
        throw std::invalid_argument("run_scenario: the config defines no events");
    return run_eval(cfg, out_dir);
}

GehReport run_validate_demand(const ScenarioConfig& cfg, const std::string& out_dir) {
    ScenarioConfig c = cfg;
    c.horizon = static_cast<int>(c.validate_window) + 600; // settle-in margin
    c.repeats = 1;
    ScenarioRuntime rt(c, c.seed, LogLevel::EventsOnly, nullptr);
    if (c.controller == ControllerType::Policy)
        throw std::invalid_argument("validate-demand runs under tl or notl control");
    DecideFn none = [](const std::vector<DecisionQuery>&) {
        return std::vector<DecisionAnswer>{};
    };
    rt.run_all(none);
    GehReport rep = validate_demand(rt.log(), c.demand_profile(), c.validate_window);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(out_dir + "/manifest.txt", serialize_manifest(c));
        std::ostringstream o;
        o << "stream,count,geh,pass\n";
        const auto& order = canonical_streams(c.mode);
        DemandProfile prof = c.demand_profile();
        for (size_t j = 0; j < order.size(); ++j) {
            if (!rep.stream_active[j]) continue;
            o << stream_name(order[j]) << "," << fmt(prof.counts[j]) << ","
              << fmt(rep.per_stream[j]) << "," << (rep.per_stream[j] < 5.0 ? "true" : "false")
              << "\n";
        }
        o << "mean," << "," << fmt(rep.mean) << "," << (rep.mean < 5.0 ? "true" : "false") << "\n";
        write_file(out_dir + "/validate.csv", o.str());
    }
    return rep;
}

} // namespace cxflow
