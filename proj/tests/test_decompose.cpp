#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "foa/decompose.hpp"
#include "foa/embedding.hpp"
#include "foa/errors.hpp"

using namespace foa;

namespace {

TaskSpec make_task() {
    TaskSpec task;
    task.task_id = "t";
    task.description = "handle the workload";
    task.semantic = embed_text(task.description);
    task.required_policies = Bitset(kPolicyBits);
    task.required_policies.set(2);
    task.resource_demand = Vec(kResourceDim, 1.0);
    return task;
}

Proposal make_proposal(const std::string& proposer,
                       const std::vector<std::string>& descriptions,
                       std::vector<std::pair<std::size_t, std::size_t>> deps = {}) {
    Proposal p;
    p.proposer_id = proposer;
    for (const auto& d : descriptions) p.subtasks.push_back({d, embed_text(d)});
    p.deps = std::move(deps);
    return p;
}

// Independent transitive-closure merge count: greedy component growth
// until fixpoint, no union-find.
std::size_t oracle_component_count(const std::vector<Vec>& embeddings, double sim) {
    std::vector<std::set<std::size_t>> comps;
    for (std::size_t i = 0; i < embeddings.size(); ++i) comps.push_back({i});
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t a = 0; a < comps.size() && !changed; ++a) {
            for (std::size_t b = a + 1; b < comps.size() && !changed; ++b) {
                for (auto i : comps[a]) {
                    for (auto j : comps[b]) {
                        if (cosine(embeddings[i], embeddings[j]) >= sim) {
                            comps[a].insert(comps[b].begin(), comps[b].end());
                            comps.erase(comps.begin() + b);
                            changed = true;
                            break;
                        }
                    }
                    if (changed) break;
                }
            }
        }
    }
    return comps.size();
}

}  // namespace

TEST_CASE("clamp truncates above max and rejects below min") {
    auto p = make_proposal("a", {"one thing", "two thing", "three thing", "four thing",
                                 "five thing"},
                           {{0, 1}, {3, 4}, {1, 2}});
    auto clamped = clamp_proposal(p, 2, 4);
    REQUIRE(clamped);
    CHECK(clamped->subtasks.size() == 4);
    // The {3,4} dep pointed past the cut and is dropped.
    CHECK(clamped->deps == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});

    CHECK_FALSE(clamp_proposal(make_proposal("a", {"only one"}), 2, 4));
}

TEST_CASE("proposal validate rejects bad indices and self loops") {
    auto p = make_proposal("a", {"x task", "y task"}, {{0, 1}});
    CHECK_NOTHROW(p.validate());
    p.deps = {{0, 0}};
    CHECK_THROWS(p.validate());
    p.deps = {{0, 5}};
    CHECK_THROWS(p.validate());
}

TEST_CASE("identical proposals merge into one set of nodes") {
    std::vector<std::string> subs{"collect raw telemetry samples", "analyze failure modes",
                                  "report remediation findings"};
    std::vector<Proposal> props{make_proposal("a", subs, {{0, 1}, {1, 2}}),
                                make_proposal("b", subs, {{0, 1}, {1, 2}})};
    TaskSpec task = make_task();
    TaskDag dag = merge_proposals(props, 0.5, task, 2);
    CHECK(dag.nodes.size() == 3);
    CHECK(dag.edges.size() == 2);
    for (const auto& [id, req] : dag.nodes) {
        CHECK(id.rfind("t.s", 0) == 0);
        CHECK(req.required_policies.test(2));
        CHECK(req.team_cap == 2);
        CHECK(is_unit(req.semantic));
    }
}

TEST_CASE("disjoint proposals stay separate and edges remap") {
    std::vector<Proposal> props{
        make_proposal("a", {"gather apples from the orchard", "press the cider"}, {{0, 1}}),
        make_proposal("b", {"knit a wool sweater", "ship the sweater parcel"}, {{0, 1}})};
    TaskDag dag = merge_proposals(props, 0.5, make_task(), 1);
    CHECK(dag.nodes.size() == 4);
    CHECK(dag.edges.size() == 2);
    auto order = dag.topological_order();
    REQUIRE(order);
    CHECK(order->size() == 4);
}

TEST_CASE("merged node count matches the component oracle on random cases") {
    std::mt19937_64 rng(777);
    std::vector<std::string> vocabulary{"alpha", "beta", "gamma", "delta", "epsilon",
                                        "zeta", "eta", "theta", "iota", "kappa"};
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<Proposal> props;
        std::vector<Vec> all;
        std::size_t np = 1 + rng() % 3;
        for (std::size_t p = 0; p < np; ++p) {
            std::vector<std::string> subs;
            std::size_t ns = 2 + rng() % 3;
            for (std::size_t s = 0; s < ns; ++s) {
                std::string text;
                std::size_t words = 2 + rng() % 3;
                for (std::size_t w = 0; w < words; ++w)
                    text += vocabulary[rng() % vocabulary.size()] + " ";
                text += "task";
                subs.push_back(text);
            }
            auto prop = make_proposal("p" + std::to_string(p), subs);
            for (const auto& s : prop.subtasks) all.push_back(s.embedding);
            props.push_back(std::move(prop));
        }
        TaskDag dag = merge_proposals(props, 0.5, make_task(), 1);
        CHECK(dag.nodes.size() == oracle_component_count(all, 0.5));
    }
}

TEST_CASE("merge order independence") {
    std::vector<Proposal> props{
        make_proposal("a", {"collect the data", "summarize results"}, {{0, 1}}),
        make_proposal("b", {"summarize the results", "archive everything"}, {{0, 1}}),
        make_proposal("c", {"collect all data", "archive everything later"})};
    auto reversed = props;
    std::reverse(reversed.begin(), reversed.end());
    TaskDag d1 = merge_proposals(props, 0.5, make_task(), 1);
    TaskDag d2 = merge_proposals(reversed, 0.5, make_task(), 1);
    REQUIRE(d1.nodes.size() == d2.nodes.size());
    CHECK(d1.edges == d2.edges);
    for (const auto& [id, req] : d1.nodes)
        CHECK(d2.nodes.at(id).description == req.description);
}

TEST_CASE("higher merge threshold never produces fewer nodes") {
    std::vector<Proposal> props{
        make_proposal("a", {"collect the incident data", "summarize incident data",
                            "write the final report"}),
        make_proposal("b", {"collect incident data today", "draft the final report"})};
    std::size_t prev = 0;
    for (double sim : {0.2, 0.5, 0.8, 1.01}) {
        TaskDag dag = merge_proposals(props, sim, make_task(), 1);
        CHECK(dag.nodes.size() >= prev);
        prev = dag.nodes.size();
    }
    CHECK(prev == 5);  // nothing merges above cosine 1
}

TEST_CASE("empty proposal set raises EmptyDecomposition") {
    CHECK_THROWS_AS(merge_proposals({}, 0.5, make_task(), 1), EmptyDecomposition);
}

TEST_CASE("validate_dag drops dangling edges and breaks cycles") {
    TaskDag g;
    for (int i = 0; i < 3; ++i) {
        SubtaskRequirement req;
        req.subtask_id = "n" + std::to_string(i);
        g.nodes.emplace(req.subtask_id, req);
    }
    g.edges = {{"n0", "n1"}, {"n1", "n2"}, {"n2", "n0"}, {"n0", "ghost"}};
    TaskDag fixed = validate_dag(g);
    CHECK(fixed.edges.count({"n0", "ghost"}) == 0);
    REQUIRE(fixed.topological_order());
    // The lexicographically greatest edge of the cycle goes.
    CHECK(fixed.edges.count({"n2", "n0"}) == 0);
    CHECK(fixed.edges.count({"n0", "n1"}) == 1);
    CHECK(fixed.edges.count({"n1", "n2"}) == 1);
}

TEST_CASE("validate_dag fuzz: 500 random digraphs all end acyclic") {
    std::mt19937_64 rng(31337);
    for (int iter = 0; iter < 500; ++iter) {
        TaskDag g;
        std::size_t n = 2 + rng() % 7;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) {
            SubtaskRequirement req;
            req.subtask_id = "v" + std::to_string(i);
            ids.push_back(req.subtask_id);
            g.nodes.emplace(req.subtask_id, req);
        }
        std::size_t edges = rng() % (n * n);
        for (std::size_t e = 0; e < edges; ++e) {
            std::string a = ids[rng() % n], b = ids[rng() % n];
            if (a != b) g.edges.emplace(a, b);
        }
        TaskDag fixed = validate_dag(g);
        auto order = fixed.topological_order();
        REQUIRE(order);
        CHECK(order->size() == n);
        // Kept edges all point forward in the order.
        std::map<std::string, std::size_t> pos;
        for (std::size_t i = 0; i < order->size(); ++i) pos[(*order)[i]] = i;
        for (const auto& [a, b] : fixed.edges) CHECK(pos[a] < pos[b]);
    }
}

TEST_CASE("topological order breaks ties by ascending id") {
    TaskDag g;
    for (const char* id : {"b", "a", "c"}) {
        SubtaskRequirement req;
        req.subtask_id = id;
        g.nodes.emplace(req.subtask_id, req);
    }
    auto order = g.topological_order();
    REQUIRE(order);
    CHECK(*order == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("select_candidates caps at k and falls back below threshold") {
    TaskSpec task = make_task();
    task.required_policies = Bitset(kPolicyBits);
    std::vector<AgentProfile> agents;
    for (int i = 0; i < 6; ++i) {
        AgentProfile a;
        a.vcv.agent_id = "a" + std::to_string(i);
        a.vcv.capability = embed_text(i < 3 ? "handle the workload item " + std::to_string(i)
                                            : "unrelated hobby number " + std::to_string(i));
        a.vcv.resources = Vec(kResourceDim, 2.0);
        a.vcv.policies = Bitset(kPolicyBits);
        a.vcv.spec_embedding = a.vcv.capability;
        agents.push_back(std::move(a));
    }
    auto picked = select_candidates(task, agents, 0.3, 2);
    REQUIRE(picked.size() <= 2);
    for (auto i : picked) CHECK(i < 3);  // the overlapping agents win

    // Unreachable threshold: the top-k fallback still returns candidates.
    auto fallback = select_candidates(task, agents, 0.999, 3);
    CHECK(fallback.size() == 3);
}

TEST_CASE("proposal json round trip re-embeds descriptions") {
    auto p = make_proposal("a", {"collect data", "report data"}, {{0, 1}});
    Proposal back = Proposal::from_json(p.to_json());
    CHECK(back.proposer_id == p.proposer_id);
    REQUIRE(back.subtasks.size() == 2);
    CHECK(back.subtasks[1].description == "report data");
    CHECK(back.subtasks[1].embedding == p.subtasks[1].embedding);
    CHECK(back.deps == p.deps);
}
