#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "foa/embedding.hpp"
#include "foa/errors.hpp"
#include "foa/routing.hpp"

using namespace foa;

namespace {

SubtaskRequirement make_req(const std::string& text, Vec demand = Vec(kResourceDim, 1.0)) {
    SubtaskRequirement req;
    req.subtask_id = "s0";
    req.description = text;
    req.semantic = embed_text(text);
    req.required_policies = Bitset(kPolicyBits);
    req.resource_demand = std::move(demand);
    req.spec_requirement = embed_text("spec " + text);
    return req;
}

AgentProfile make_agent(const std::string& text, Vec resources = Vec(kResourceDim, 2.0)) {
    AgentProfile a;
    a.vcv.agent_id = "a0";
    a.vcv.capability = embed_text(text);
    a.vcv.resources = std::move(resources);
    a.vcv.policies = Bitset(kPolicyBits);
    a.vcv.spec_embedding = embed_text("spec " + text);
    return a;
}

}  // namespace

TEST_CASE("resource penalty only charges shortfalls") {
    Vec demand{2.0, 2.0, 2.0, 2.0};
    Vec rich{3.0, 3.0, 3.0, 3.0};
    CHECK(resource_penalty(demand, rich) == doctest::Approx(1.0));

    // Unit shortfall on one axis: exp(-1) = 0.3678794411714423.
    Vec short1{1.0, 2.0, 2.0, 2.0};
    CHECK(resource_penalty(demand, short1) == doctest::Approx(0.3678794411714423));

    // Shortfall 1 on two axes: exp(-sqrt(2)) = 0.2431167344342142.
    Vec short2{1.0, 1.0, 2.0, 2.0};
    CHECK(resource_penalty(demand, short2) == doctest::Approx(0.2431167344342142));

    // Lambda scales the exponent.
    CHECK(resource_penalty(demand, short1, 2.0) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("penalty is monotone in the shortfall") {
    Vec demand{4.0, 4.0, 4.0, 4.0};
    double prev = 1.1;
    for (double have = 4.0; have >= 0.0; have -= 0.5) {
        double p = resource_penalty(demand, Vec{have, 4.0, 4.0, 4.0});
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("policy gate zeroes the score exactly") {
    auto req = make_req("analyze the incident data");
    req.required_policies.set(3);
    auto agent = make_agent("analyze incident data quickly");
    CHECK(compatibility_score(req, agent) == 0.0);

    agent.vcv.policies.set(3);
    double score = compatibility_score(req, agent);
    CHECK(score > 0.0);
    double recomputed = cosine(req.semantic, agent.vcv.capability) *
                        resource_penalty(req.resource_demand, agent.vcv.resources) *
                        cosine(req.spec_requirement, agent.vcv.spec_embedding);
    CHECK(score == doctest::Approx(recomputed).epsilon(1e-12));
}

TEST_CASE("randomized gate check over 100 pairs") {
    std::mt19937_64 rng(404);
    for (int i = 0; i < 100; ++i) {
        auto req = make_req("task variant " + std::to_string(rng() % 1000));
        auto agent = make_agent("agent variant " + std::to_string(rng() % 1000));
        std::size_t bit = rng() % kPolicyBits;
        req.required_policies.set(bit);
        agent.vcv.policies = Bitset(kPolicyBits);
        CHECK(compatibility_score(req, agent) == 0.0);
        agent.vcv.policies.set(bit);
        double expected = cosine(req.semantic, agent.vcv.capability) *
                          resource_penalty(req.resource_demand, agent.vcv.resources) *
                          cosine(req.spec_requirement, agent.vcv.spec_embedding);
        CHECK(compatibility_score(req, agent) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("task affinity drops the spec term") {
    auto req = make_req("collect incident data");
    auto agent = make_agent("collect incident data");
    double affinity = task_affinity(req.semantic, req.required_policies, req.resource_demand,
                                    agent);
    double expected = cosine(req.semantic, agent.vcv.capability) *
                      resource_penalty(req.resource_demand, agent.vcv.resources);
    CHECK(affinity == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("solver covers every subtask within caps") {
    std::vector<std::vector<double>> scores{{0.9, 0.1, 0.5}, {0.2, 0.8, 0.4}};
    std::vector<double> reps{1.0, 1.0, 1.0};
    auto m = solve_assignment(scores, reps, {2, 2}, {1, 1, 1});
    std::vector<std::size_t> load(3, 0);
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        CHECK(m.rows[i].size() >= 1);
        CHECK(m.rows[i].size() <= 2);
        for (auto j : m.rows[i]) ++load[j];
    }
    for (auto l : load) CHECK(l <= 1);
}

TEST_CASE("solver matches the exhaustive oracle on random instances") {
    std::mt19937_64 rng(2024);
    for (int inst = 0; inst < 200; ++inst) {
        std::size_t k = 1 + rng() % 5, n = 1 + rng() % 6;
        std::vector<std::vector<double>> scores(k, std::vector<double>(n));
        std::vector<double> reps(n);
        std::vector<std::size_t> team_caps(k), capacities(n);
        for (auto& row : scores)
            for (auto& s : row) s = (rng() % 100 < 15) ? 0.0 : (rng() % 1000) / 1000.0;
        for (auto& r : reps) r = 0.1 + (rng() % 900) / 1000.0;
        for (auto& t : team_caps) t = 1 + rng() % 2;
        for (auto& c : capacities) c = 1 + rng() % 3;

        bool oracle_feasible = true;
        double oracle = 0.0;
        try {
            oracle = exhaustive_assignment_objective(scores, reps, team_caps, capacities);
        } catch (const InfeasibleError&) {
            oracle_feasible = false;
        }
        try {
            auto m = solve_assignment(scores, reps, team_caps, capacities);
            REQUIRE(oracle_feasible);
            CHECK(m.objective == doctest::Approx(oracle).epsilon(1e-9));
        } catch (const InfeasibleError&) {
            CHECK_FALSE(oracle_feasible);
        }
    }
}

TEST_CASE("infeasible instance names the uncovered subtasks") {
    std::vector<std::vector<double>> scores{{0.5, 0.6}, {0.0, 0.0}};
    try {
        solve_assignment(scores, {1.0, 1.0}, {1, 1}, {2, 2}, {"sA", "sB"}, {"x", "y"});
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        REQUIRE(e.uncovered_subtasks.size() == 1);
        CHECK(e.uncovered_subtasks[0] == "sB");
    }
}

TEST_CASE("objective is invariant under uniform score scaling") {
    std::vector<std::vector<double>> scores{{0.3, 0.7, 0.2}, {0.6, 0.1, 0.9}};
    std::vector<double> reps{0.8, 0.9, 1.0};
    auto base = solve_assignment(scores, reps, {1, 1}, {1, 1, 1});
    for (auto& row : scores)
        for (auto& s : row) s *= 10.0;
    auto scaled = solve_assignment(scores, reps, {1, 1}, {1, 1, 1});
    CHECK(scaled.rows == base.rows);
    CHECK(scaled.objective == doctest::Approx(base.objective * 10.0));
}

TEST_CASE("capacity one forces disjoint assignments") {
    std::vector<std::vector<double>> scores{{0.9, 0.8}, {0.9, 0.1}};
    // Greedy would give both rows agent 0; the repair path must route
    // subtask 0 to agent 1.
    auto m = solve_assignment(scores, {1.0, 1.0}, {1, 1}, {1, 1});
    REQUIRE(m.rows[0].size() == 1);
    REQUIRE(m.rows[1].size() == 1);
    CHECK(m.rows[0][0] == 1);
    CHECK(m.rows[1][0] == 0);
}
