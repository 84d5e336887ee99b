#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "foa/orchestrator.hpp"
#include "foa/scenario.hpp"
#include "foa/hashing.hpp"

using namespace foa;

namespace {

std::string scenario_path(const std::string& name) {
    return std::string(SCENARIO_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("synth with no predecessors returns the answer unchanged") {
    for (auto mode : {SynthMode::Concat, SynthMode::Rebase, SynthMode::Merge})
        CHECK(synth({}, "just me", mode) == "just me");
}

TEST_CASE("concat labels every block") {
    std::string out = synth({{"s0", "alpha"}, {"s1", "beta"}}, "mine", SynthMode::Concat);
    CHECK(out == "[from s0]\nalpha\n[from s1]\nbeta\n[node]\nmine");
}

TEST_CASE("rebase keeps node lines and prepends novel predecessor lines") {
    std::string out = synth({{"s0", "shared\nextra"}}, "shared\nlocal", SynthMode::Rebase);
    CHECK(out == "extra\nshared\nlocal");
}

TEST_CASE("merge unions distinct lines and flags multi-source ones") {
    std::string out =
        synth({{"s0", "a\nboth"}, {"s1", "b\nboth"}}, "c\nboth", SynthMode::Merge);
    CHECK(out == "a\n~ both\nb\nc");
}

TEST_CASE("synth mode names round trip") {
    for (auto mode : {SynthMode::Concat, SynthMode::Rebase, SynthMode::Merge})
        CHECK(synth_mode_from_string(to_string(mode)) == mode);
    CHECK_THROWS(synth_mode_from_string("squash"));
}

TEST_CASE("update_reputation is a clamped EMA") {
    CHECK(update_reputation(1.0, 0.0, 0.2) == doctest::Approx(0.8));
    CHECK(update_reputation(0.5, 1.0, 0.2) == doctest::Approx(0.6));
    CHECK(update_reputation(1.0, 1.0, 0.2) == doctest::Approx(1.0));
    CHECK_THROWS(update_reputation(0.5, 1.5, 0.2));
}

TEST_CASE("synthesize_dag on a diamond runs one op per node plus edge") {
    TaskDag dag;
    for (const char* id : {"a", "b", "c", "d"}) {
        SubtaskRequirement req;
        req.subtask_id = id;
        dag.nodes.emplace(req.subtask_id, req);
    }
    dag.edges = {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}};
    std::map<std::string, std::string> answers{
        {"a", "root"}, {"b", "left"}, {"c", "right"}, {"d", "join"}};
    auto outcome = synthesize_dag(dag, answers, SynthMode::Concat);
    CHECK(outcome.ops == 4 + 4);
    CHECK(outcome.solutions.at("a") == "root");
    CHECK(outcome.final_answer == outcome.solutions.at("d"));
    CHECK(outcome.final_answer.find("root") != std::string::npos);
    CHECK(outcome.final_answer.find("[node]\njoin") != std::string::npos);
}

TEST_CASE("multiple sinks are combined in ascending id order") {
    TaskDag dag;
    for (const char* id : {"a", "z-sink", "b-sink"}) {
        SubtaskRequirement req;
        req.subtask_id = id;
        dag.nodes.emplace(req.subtask_id, req);
    }
    dag.edges = {{"a", "z-sink"}, {"a", "b-sink"}};
    std::map<std::string, std::string> answers{
        {"a", "base"}, {"z-sink", "zed"}, {"b-sink", "bee"}};
    auto outcome = synthesize_dag(dag, answers, SynthMode::Concat);
    CHECK(outcome.final_answer.find("[from b-sink]") != std::string::npos);
    CHECK(outcome.final_answer.find("[from b-sink]") <
          outcome.final_answer.find("[from z-sink]"));
}

TEST_CASE("smoke scenario completes with a dependency chain") {
    Scenario scenario = load_scenario(scenario_path("smoke.json"));
    auto run = run_scenario(scenario);
    REQUIRE(run.reports.size() == 1);
    const JobReport& report = run.reports[0];
    CHECK(run.all_done);
    CHECK(report.phase == Phase::Done);
    CHECK(report.node_count == 3);
    CHECK(report.edge_count == 3);
    CHECK_FALSE(report.final_answer.empty());
    CHECK(report.fallback_events.empty());
    REQUIRE(report.oracle_objective);
    CHECK(report.assignment_objective ==
          doctest::Approx(*report.oracle_objective).epsilon(1e-9));
    CHECK(report.topic_publishes.at("foa/result") == 1);
    CHECK(report.phase_ticks.count("Executing"));
}

TEST_CASE("timeout scenario falls back and still completes") {
    Scenario scenario = load_scenario(scenario_path("timeout.json"));
    auto run = run_scenario(scenario);
    REQUIRE(run.reports.size() == 1);
    const JobReport& report = run.reports[0];
    CHECK(report.phase == Phase::Done);
    REQUIRE(!report.fallback_events.empty());
    bool saw_reassign = false, saw_accept = false;
    for (const auto& e : report.fallback_events) {
        if (e.rfind("reassign", 0) == 0) saw_reassign = true;
        if (e.rfind("accept-best-draft", 0) == 0) saw_accept = true;
    }
    CHECK(saw_reassign);
    CHECK(saw_accept);
}

TEST_CASE("infeasible scenario fails in the assignment phase") {
    Scenario scenario = load_scenario(scenario_path("infeasible.json"));
    auto run = run_scenario(scenario);
    REQUIRE(run.reports.size() == 1);
    CHECK_FALSE(run.all_done);
    CHECK(run.reports[0].phase == Phase::Failed);
    CHECK(run.reports[0].diagnostic.find("infeasible") != std::string::npos);
}

TEST_CASE("blocklisted submissions fail before decomposition") {
    Scenario scenario = load_scenario(scenario_path("smoke.json"));
    scenario.blocklist = {"incident"};
    auto run = run_scenario(scenario);
    CHECK(run.reports[0].phase == Phase::Failed);
    CHECK(run.reports[0].diagnostic.find("blocked by policy") != std::string::npos);
    CHECK(run.reports[0].node_count == 0);
}

TEST_CASE("repeated runs are bitwise identical") {
    Scenario scenario = load_scenario(scenario_path("smoke.json"));
    auto first = run_scenario(scenario);
    for (int i = 0; i < 2; ++i) {
        auto again = run_scenario(scenario);
        CHECK(again.reports[0].final_answer == first.reports[0].final_answer);
        CHECK(again.reports[0].topic_publishes == first.reports[0].topic_publishes);
        CHECK(again.reports[0].raw_deliveries == first.reports[0].raw_deliveries);
    }
    Scenario reseeded = scenario;
    reseeded.seed += 1;
    auto other = run_scenario(reseeded);
    CHECK(other.reports[0].final_answer != first.reports[0].final_answer);
}

TEST_CASE("successful jobs move contributor reputations toward the outcome") {
    Scenario scenario = load_scenario(scenario_path("smoke.json"));
    Broker broker;
    Federation federation(broker);
    for (MockAgentConfig cfg : scenario.agents) {
        cfg.seed = mix64(cfg.seed ^ scenario.seed);
        federation.register_agent(std::move(cfg));
    }
    broker.flush();
    Orchestrator orchestrator(broker, federation, scenario.config);
    JobReport report = orchestrator.run_job(scenario.tasks[0]);
    REQUIRE(report.phase == Phase::Done);
    // outcome_score 0.9, beta 0.2: contributors move from 1.0 to 0.98.
    bool moved = false;
    for (const auto& profile : federation.profiles()) {
        double rep = profile.reputation;
        if (rep == doctest::Approx(0.98)) moved = true;
        CHECK(rep <= 1.0);
    }
    CHECK(moved);
}

TEST_CASE("duplicate qos1 redelivery changes only raw delivery counts") {
    Scenario scenario = load_scenario(scenario_path("smoke.json"));

    auto run_with_dup = [&](bool dup) {
        Broker broker;
        broker.set_duplicate_qos1(dup);
        Federation federation(broker);
        for (MockAgentConfig cfg : scenario.agents) {
            cfg.seed = mix64(cfg.seed ^ scenario.seed);
            federation.register_agent(std::move(cfg));
        }
        broker.flush();
        Orchestrator orchestrator(broker, federation, scenario.config);
        return orchestrator.run_job(scenario.tasks[0]);
    };

    JobReport clean = run_with_dup(false);
    JobReport dup = run_with_dup(true);
    CHECK(dup.phase == Phase::Done);
    CHECK(dup.final_answer == clean.final_answer);
    CHECK(dup.topic_publishes == clean.topic_publishes);
    CHECK(dup.cluster_rounds == clean.cluster_rounds);
    CHECK(dup.assignment_objective == doctest::Approx(clean.assignment_objective));
    CHECK(dup.phase_ticks == clean.phase_ticks);
    CHECK(dup.synth_ops == clean.synth_ops);
    CHECK(dup.raw_deliveries > clean.raw_deliveries);
}

TEST_CASE("env overrides reshape the decomposition knobs") {
    setenv("FOE_DECOMP_SUBTASKS_MAX", "3", 1);
    setenv("FOE_CLUSTER_SIM_THRESHOLD", "0.35", 1);
    Scenario scenario = load_scenario(scenario_path("smoke.json"));
    unsetenv("FOE_DECOMP_SUBTASKS_MAX");
    unsetenv("FOE_CLUSTER_SIM_THRESHOLD");
    CHECK(scenario.config.decomp.subtasks_max == 3);
    CHECK(scenario.config.cluster_cut == doctest::Approx(0.35));

    Scenario plain = load_scenario(scenario_path("smoke.json"));
    CHECK(plain.config.decomp.subtasks_max == 4);
}

TEST_CASE("job report serializes its counters") {
    Scenario scenario = load_scenario(scenario_path("smoke.json"));
    auto run = run_scenario(scenario);
    auto j = run.reports[0].to_json();
    CHECK(j.at("phase") == "Done");
    CHECK(j.at("task_id") == "t1");
    CHECK(j.at("node_count") == 3);
    CHECK(j.contains("cluster_rounds"));
    CHECK(j.at("raw_deliveries").get<std::uint64_t>() > 0);
}
