#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cxflow/checkpoint.hpp"
#include "cxflow/config.hpp"
#include "cxflow/learn.hpp"
#include "cxflow/runner.hpp"

using namespace cxflow;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    uint64_t seed = 0;
    bool seed_set = false;
    int repeats = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "scenario config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override run.seed")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--repeats", args.repeats, "override run.repeats");
}

ScenarioConfig load(const CommonArgs& args) {
    ScenarioConfig cfg = parse_config_file(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (args.repeats > 0) cfg.repeats = args.repeats;
    return cfg;
}

void print_summary(const EvalResult& r) {
    double awt = 0.0, tp = 0.0;
    int congested = 0;
    for (const RolloutSummary& s : r.rollouts) {
        awt += s.awt;
        tp += s.throughput;
        if (s.congested) ++congested;
    }
    size_t n = r.rollouts.size();
    std::printf("rollouts: %zu  awt: %.2f s  throughput: %.1f v/h  congested: %d/%zu\n", n,
                awt / n, tp / n, congested, n);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixed-traffic intersection control testbed"};
    app.require_subcommand(1);

    CommonArgs train_args, eval_args, sweep_args, scenario_args, validate_args;

    CLI::App* cmd_train = app.add_subcommand("train", "train the stop/go value policy");
    add_common(cmd_train, train_args);

    CLI::App* cmd_eval = app.add_subcommand("eval", "roll out a scenario and emit metrics");
    add_common(cmd_eval, eval_args);

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "repeat eval across an axis of values");
    add_common(cmd_sweep, sweep_args);
    std::string axis = "demand";
    std::vector<double> values;
    cmd_sweep->add_option("--axis", axis, "demand | rv_rate | per");
    cmd_sweep->add_option("--values", values, "sweep values")->required()->delimiter(',');

    CLI::App* cmd_scenario =
        app.add_subcommand("scenario", "run a scenario with events (blackout, rv drop)");
    add_common(cmd_scenario, scenario_args);

    CLI::App* cmd_validate =
        app.add_subcommand("validate-demand", "compare simulated flow against demand via GEH");
    add_common(cmd_validate, validate_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_train->parsed()) {
            ScenarioConfig cfg = load(train_args);
            std::filesystem::create_directories(train_args.out_dir);
            std::ofstream(train_args.out_dir + "/manifest.txt") << serialize_manifest(cfg);
            TrainOutcome out = train(cfg, cfg.learn);
            save_checkpoint(train_args.out_dir + "/checkpoint.cxf", out.policy, cfg.mode);
            std::ostringstream curves;
            curves << "epoch,cumulative_wait,conflicts,epsilon\n";
            for (size_t e = 0; e < out.curves.cumulative_wait.size(); ++e)
                curves << e << "," << out.curves.cumulative_wait[e] << ","
                       << out.curves.conflicts[e] << "," << out.curves.epsilon[e] << "\n";
            std::ofstream(train_args.out_dir + "/curves.csv") << curves.str();
            std::printf("trained %zu epochs -> %s/checkpoint.cxf\n",
                        out.curves.cumulative_wait.size(), train_args.out_dir.c_str());
        } else if (cmd_eval->parsed()) {
            ScenarioConfig cfg = load(eval_args);
            print_summary(run_eval(cfg, eval_args.out_dir));
        } else if (cmd_sweep->parsed()) {
            ScenarioConfig cfg = load(sweep_args);
            SweepAxis ax;
            if (axis == "demand") ax = SweepAxis::Demand;
            else if (axis == "rv_rate") ax = SweepAxis::RvRate;
            else if (axis == "per") ax = SweepAxis::Per;
            else throw std::invalid_argument("unknown sweep axis: " + axis);
            auto rows = run_sweep(cfg, ax, values, sweep_args.out_dir);
            for (const SweepRow& r : rows)
                std::printf("value %.3f  awt %.2f  congested %s  avg_speed %.2f\n", r.value,
                            r.awt, r.congested ? "yes" : "no", r.avg_speed);
        } else if (cmd_scenario->parsed()) {
            ScenarioConfig cfg = load(scenario_args);
            print_summary(run_scenario(cfg, scenario_args.out_dir));
        } else if (cmd_validate->parsed()) {
            ScenarioConfig cfg = load(validate_args);
            GehReport rep = run_validate_demand(cfg, validate_args.out_dir);
            const auto& order = canonical_streams(cfg.mode);
            for (size_t j = 0; j < order.size(); ++j)
                if (rep.stream_active[j])
                    std::printf("%s  geh %.3f  %s\n", stream_name(order[j]).c_str(),
                                rep.per_stream[j], rep.per_stream[j] < 5.0 ? "pass" : "FAIL");
            std::printf("mean geh %.3f (%s)\n", rep.mean, rep.mean < 5.0 ? "pass" : "FAIL");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
