#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cxflow/learn.hpp"
#include "cxflow/runner.hpp"

using namespace cxflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig small_notl(double count, int horizon = 400) {
    std::ostringstream o;
    o << "controller.type = notl\n"
      << "demand.count.default = " << count << "\n"
      << "demand.rv_rate = 0\n"
      << "run.horizon = " << horizon << "\n"
      << "run.seed = 11\n"
      << "run.repeats = 1\n";
    return parse_config_text(o.str());
}

DecideFn always_go() {
    return [](const std::vector<DecisionQuery>& q) {
        return std::vector<DecisionAnswer>(q.size(), DecisionAnswer{Action::Go, false});
    };
}

} // namespace

TEST_CASE("rollout csv header is pinned for J = 8") {
    CHECK(rollout_csv_header(8, false) ==
          "step,awt_intersection,awt_E-L,awt_E-C,awt_W-L,awt_W-C,awt_N-L,awt_N-C,awt_S-L,"
          "awt_S-C,avg_speed,throughput,conflict_rate_cum,cl_E-L,cl_E-C,cl_W-L,cl_W-C,cl_N-L,"
          "cl_N-C,cl_S-L,cl_S-C");
    CHECK(rollout_csv_header(8, true) ==
          "step,awt_intersection,awt_E-L,awt_E-C,awt_W-L,awt_W-C,awt_N-L,awt_N-C,awt_S-L,"
          "awt_S-C,avg_speed,throughput,conflict_rate_cum,cl_E-L,cl_E-C,cl_W-L,cl_W-C,cl_N-L,"
          "cl_N-C,cl_S-L,cl_S-C,event");
}

TEST_CASE("identical manifests reproduce run outputs byte for byte") {
    ScenarioConfig cfg = small_notl(150.0, 300);
    fs::path a = "test_out/det_a", b = "test_out/det_b";
    fs::remove_all(a);
    fs::remove_all(b);
    run_eval(cfg, a.string());
    ScenarioConfig cfg2 = parse_config_text(slurp((a / "manifest.txt").string()));
    run_eval(cfg2, b.string());
    for (const char* f : {"manifest.txt", "rollout_0.csv", "events_0.csv", "summary.csv"})
        CHECK(slurp((a / f).string()) == slurp((b / f).string()));
}

TEST_CASE("notl at saturating demand congests; light demand flows") {
    ScenarioConfig light = small_notl(60.0);
    EvalResult r1 = run_eval(light, "");
    CHECK_FALSE(r1.rollouts[0].congested);
    CHECK(r1.rollouts[0].throughput > 100.0);

    ScenarioConfig heavy = small_notl(400.0, 600);
    EvalResult r2 = run_eval(heavy, "");
    CHECK(r2.rollouts[0].congested);
}

TEST_CASE("demand is conserved through spawning and backlog") {
    ScenarioConfig cfg = small_notl(300.0, 300);
    ScenarioRuntime rt(cfg, cfg.seed, LogLevel::EventsOnly);
    DecideFn none = [](const std::vector<DecisionQuery>&) {
        return std::vector<DecisionAnswer>{};
    };
    rt.run_all(none);
    CHECK(rt.scheduled() == rt.spawned() + rt.backlog());
    CHECK(rt.spawned() > 0);
}

TEST_CASE("zone claims prevent co-occupancy even under always-Go") {
    ScenarioConfig cfg = parse_config_text(
        "controller.type = policy\n"
        "demand.count.default = 300\n"
        "demand.rv_rate = 1\n"
        "run.horizon = 2000\n"
        "run.seed = 5\n");
    Rng rng(1);
    nn::Mlp net = nn::make_value_network(97, rng);
    ScenarioRuntime rt(cfg, cfg.seed, LogLevel::EventsOnly, &net);
    rt.run_all(always_go());
    CHECK(rt.conflict_event_count() == 0);
    CHECK_FALSE(rt.grant_check_failed());
    CHECK(rt.exits() > 100);
}

TEST_CASE("disabling the resolution mechanism still never co-occupies zones") {
    ScenarioConfig cfg = parse_config_text(
        "controller.type = policy\n"
        "controller.resolution = false\n"
        "demand.count.default = 300\n"
        "demand.rv_rate = 1\n"
        "run.horizon = 800\n"
        "run.seed = 6\n");
    Rng rng(1);
    nn::Mlp net = nn::make_value_network(97, rng);
    ScenarioRuntime rt(cfg, cfg.seed, LogLevel::EventsOnly, &net);
    rt.run_all(always_go());
    CHECK(rt.conflict_event_count() == 0);
}

TEST_CASE("checkpoint round trip and mode mismatch") {
    fs::create_directories("test_out");
    Rng rng(2);
    nn::Mlp net = nn::make_value_network(observation_length(8), rng);
    save_checkpoint("test_out/ck8.cxf", net, 8);
    Checkpoint ck = load_checkpoint("test_out/ck8.cxf");
    CHECK(ck.mode == 8);
    REQUIRE(ck.net.layers.size() == net.layers.size());
    for (size_t k = 0; k < net.layers.size(); ++k)
        CHECK(ck.net.layers[k].W == net.layers[k].W);

    ScenarioConfig cfg = parse_config_text(
        "controller.type = policy\n"
        "controller.checkpoint = test_out/ck8.cxf\n"
        "intersection.mode = 12\n"
        "run.horizon = 10\n");
    CHECK_THROWS_WITH_AS(run_eval(cfg, ""), doctest::Contains("mode"), std::invalid_argument);
}

TEST_CASE("policy eval with epsilon 0 records no exploratory decisions") {
    fs::create_directories("test_out");
    Rng rng(3);
    nn::Mlp net = nn::make_value_network(97, rng);
    save_checkpoint("test_out/ck_eval.cxf", net, 8);
    ScenarioConfig cfg = parse_config_text(
        "controller.type = policy\n"
        "controller.checkpoint = test_out/ck_eval.cxf\n"
        "controller.epsilon = 0\n"
        "demand.count.default = 120\n"
        "run.horizon = 300\n"
        "run.seed = 9\n");
    ScenarioRuntime rt(cfg, cfg.seed, LogLevel::Full, &net);
    DecideFn decide = policy_decide_fn(net, 0.0, rt.explore_rng());
    rt.run_all(decide);
    long long exploratory = 0, total = 0;
    for (const StepRecord& rec : rt.log().steps)
        for (const DecisionRecord& d : rec.decisions) {
            ++total;
            if (d.exploratory) ++exploratory;
        }
    CHECK(total > 0);
    CHECK(exploratory == 0);
}

TEST_CASE("rv drop to the same rate leaves the run untouched") {
    std::string base =
        "controller.type = notl\n"
        "demand.count.default = 200\n"
        "demand.rv_rate = 0.9\n"
        "run.horizon = 200\n"
        "run.seed = 21\n";
    ScenarioConfig plain = parse_config_text(base);
    ScenarioConfig drop = parse_config_text(base +
                                            "event.0.kind = rv_drop\n"
                                            "event.0.at_step = 50\n"
                                            "event.0.target_rate = 0.9\n");
    ScenarioRuntime a(plain, plain.seed, LogLevel::Full);
    ScenarioRuntime b(drop, drop.seed, LogLevel::Full);
    DecideFn none = [](const std::vector<DecisionQuery>&) {
        return std::vector<DecisionAnswer>{};
    };
    a.run_all(none);
    b.run_all(none);
    REQUIRE(a.log().steps.size() == b.log().steps.size());
    for (size_t t = 0; t < a.log().steps.size(); ++t) {
        const auto& va = a.log().steps[t].vehicles;
        const auto& vb = b.log().steps[t].vehicles;
        REQUIRE(va.size() == vb.size());
        for (size_t i = 0; i < va.size(); ++i) {
            CHECK(va[i].s == vb[i].s);
            CHECK(va[i].v == vb[i].v);
        }
    }
}

TEST_CASE("rv drop converts the expected share of the fleet") {
    ScenarioConfig cfg = parse_config_text(
        "controller.type = notl\n"
        "demand.count.default = 300\n"
        "demand.rv_rate = 0.9\n"
        "run.horizon = 400\n"
        "run.seed = 33\n"
        "event.0.kind = rv_drop\n"
        "event.0.at_step = 10\n"
        "event.0.target_rate = 0.5\n");
    ScenarioRuntime rt(cfg, cfg.seed, LogLevel::Full);
    DecideFn none = [](const std::vector<DecisionQuery>&) {
        return std::vector<DecisionAnswer>{};
    };
    rt.run_all(none);
    // post-event controlled share among RVs should approach 5/9
    long long rv = 0, controlled = 0;
    for (const VehicleSnap& v : rt.log().steps.back().vehicles) {
        if (v.kind != VehicleKind::RV) continue;
        ++rv;
        if (v.controlled) ++controlled;
    }
    REQUIRE(rv > 20);
    double share = static_cast<double>(controlled) / static_cast<double>(rv);
    CHECK(share > 0.30);
    CHECK(share < 0.80);
}

TEST_CASE("blackout switches control mid-run") {
    fs::create_directories("test_out");
    Rng rng(4);
    nn::Mlp net = nn::make_value_network(97, rng);
    save_checkpoint("test_out/ck_blackout.cxf", net, 8);
    ScenarioConfig cfg = parse_config_text(
        "controller.type = tl\n"
        "controller.checkpoint = test_out/ck_blackout.cxf\n"
        "demand.count.default = 150\n"
        "run.horizon = 200\n"
        "run.seed = 14\n"
        "event.0.kind = blackout\n"
        "event.0.at_step = 100\n"
        "event.0.successor = policy\n");
    ScenarioRuntime rt(cfg, cfg.seed, LogLevel::Full, &net);
    DecideFn decide = policy_decide_fn(net, 0.0, rt.explore_rng());
    rt.run_all(decide);
    for (size_t t = 0; t < 100; ++t) CHECK(rt.log().steps[t].decisions.empty());
    long long post = 0;
    for (size_t t = 100; t < rt.log().steps.size(); ++t)
        post += static_cast<long long>(rt.log().steps[t].decisions.size());
    CHECK(post > 0);
    CHECK(rt.active_controller() == ControllerType::Policy);
}

TEST_CASE("blackout events demand a TL starting controller") {
    ScenarioConfig cfg = parse_config_text(
        "controller.type = notl\n"
        "run.horizon = 10\n"
        "event.0.kind = blackout\n"
        "event.0.at_step = 5\n"
        "event.0.successor = notl\n");
    CHECK_THROWS_AS(ScenarioRuntime(cfg, 1, LogLevel::None), std::invalid_argument);
}

TEST_CASE("rv drop above the configured rate is rejected") {
    ScenarioConfig cfg = parse_config_text(
        "controller.type = notl\n"
        "demand.rv_rate = 0.5\n"
        "run.horizon = 10\n"
        "event.0.kind = rv_drop\n"
        "event.0.at_step = 5\n"
        "event.0.target_rate = 0.8\n");
    CHECK_THROWS_AS(ScenarioRuntime(cfg, 1, LogLevel::None), std::invalid_argument);
}

TEST_CASE("runtime accumulators equal pure recomputation from the log") {
    ScenarioConfig cfg = small_notl(200.0, 300);
    ScenarioRuntime rt(cfg, cfg.seed, LogLevel::Full);
    DecideFn none = [](const std::vector<DecisionQuery>&) {
        return std::vector<DecisionAnswer>{};
    };
    rt.run_all(none);
    const RunLog& log = rt.log();
    double wait_recomputed = 0.0;
    long long exits = 0;
    for (const StepRecord& rec : log.steps) {
        for (const VehicleSnap& v : rec.vehicles)
            if (v.zone == VehicleZone::ControlZone && v.v < kStillSpeed) wait_recomputed += 1.0;
        for (const EventRecord& e : rec.events)
            if (e.type == EventType::Exit) ++exits;
    }
    CHECK(wait_recomputed == rt.cumulative_wait());
    CHECK(exits == rt.exits());
}

TEST_CASE("single-value sweep equals run_eval") {
    ScenarioConfig cfg = small_notl(150.0, 200);
    auto rows = run_sweep(cfg, SweepAxis::Demand, {150.0}, "");
    EvalResult direct = run_eval(cfg, "");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].awt == doctest::Approx(direct.rollouts[0].awt));
    CHECK(rows[0].congested == direct.rollouts[0].congested);
}

TEST_CASE("tl controller runs clean and serves all directions") {
    ScenarioConfig cfg = parse_config_text(
        "controller.type = tl\n"
        "demand.count.default = 150\n"
        "demand.rv_rate = 0\n"
        "run.horizon = 600\n"
        "run.seed = 2\n");
    ScenarioRuntime rt(cfg, cfg.seed, LogLevel::Full);
    DecideFn none = [](const std::vector<DecisionQuery>&) {
        return std::vector<DecisionAnswer>{};
    };
    rt.run_all(none);
    CHECK(rt.conflict_event_count() == 0);
    std::array<long long, 8> entered{};
    for (const StepRecord& rec : rt.log().steps)
        for (const EventRecord& e : rec.events)
            if (e.type == EventType::Enter) ++entered[e.stream];
    for (long long n : entered) CHECK(n > 0);
}
