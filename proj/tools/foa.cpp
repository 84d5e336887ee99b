#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "foa/hashing.hpp"
#include "foa/scenario.hpp"

namespace {

std::vector<std::size_t> parse_sizes(const std::string& csv) {
    std::vector<std::size_t> sizes;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) sizes.push_back(std::stoull(item));
    }
    return sizes;
}

foa::MockAgentConfig synthetic_agent(std::size_t i, std::uint64_t seed) {
    foa::MockAgentConfig cfg;
    cfg.agent_id = "bench-" + std::to_string(i / 10) + std::to_string(i % 10);
    cfg.seed = foa::mix64(seed + i);
    cfg.spec.agent_id = cfg.agent_id;
    cfg.spec.goals = {"solve synthetic workload item " + std::to_string(i % 7)};
    cfg.spec.tools = {"tool" + std::to_string(i % 5)};
    cfg.skills = {"skill" + std::to_string(i % 3), "skill" + std::to_string(i % 5)};
    for (std::size_t d = 0; d < foa::kResourceDim; ++d)
        cfg.resources[d] = 1.0 + static_cast<double>(foa::mix64(cfg.seed + d) % 100) / 50.0;
    return cfg;
}

int bench_routing(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    std::printf("%-8s %-8s %-14s %-10s\n", "agents", "tasks", "objective", "assigned");
    for (std::size_t n : sizes) {
        std::size_t k = std::max<std::size_t>(1, n / 2);
        std::vector<std::vector<double>> scores(k, std::vector<double>(n));
        std::vector<double> reputations(n);
        std::vector<std::size_t> team_caps(k, 2), capacities(n, 2);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < n; ++j)
                scores[i][j] = static_cast<double>(foa::mix64(seed + i * n + j) % 1000) / 1000.0;
        for (std::size_t j = 0; j < n; ++j)
            reputations[j] = 0.5 + static_cast<double>(foa::mix64(seed ^ j) % 500) / 1000.0;
        auto result = foa::solve_assignment(scores, reputations, team_caps, capacities);
        std::size_t pairs = 0;
        for (const auto& row : result.rows) pairs += row.size();
        std::printf("%-8zu %-8zu %-14.6f %-10zu\n", n, k, result.objective, pairs);
    }
    return 0;
}

int bench_clustering(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    std::printf("%-8s %-10s %-12s\n", "agents", "clusters", "largest");
    for (std::size_t n : sizes) {
        std::vector<foa::AgentProfile> profiles;
        std::vector<std::string> drafts;
        for (std::size_t i = 0; i < n; ++i) {
            foa::AgentProfile p;
            p.vcv = foa::build_vcv(synthetic_agent(i, seed));
            profiles.push_back(std::move(p));
            drafts.push_back("draft variant " + std::to_string(i % 4));
        }
        auto clusters = foa::form_clusters("bench", profiles, drafts, foa::ClusterWeights{},
                                           0.2, 4);
        std::size_t largest = 0;
        for (const auto& c : clusters) largest = std::max(largest, c.members.size());
        std::printf("%-8zu %-10zu %-12zu\n", n, clusters.size(), largest);
    }
    return 0;
}

int bench_consensus(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    std::printf("%-8s %-8s %-12s %-12s\n", "members", "rounds", "deliveries", "confidence");
    for (std::size_t n : sizes) {
        foa::Broker broker;
        std::vector<std::unique_ptr<foa::MockAgent>> agents;
        std::vector<foa::ConsensusMember*> members;
        foa::Cluster cluster{"bench.c0", "bench", {}, foa::topic_for(
            foa::TopicKind::ClusterChannel, "bench.c0")};
        foa::ReputationMap weights;
        for (std::size_t i = 0; i < n; ++i) {
            auto cfg = synthetic_agent(i, seed);
            cfg.complete_after_round = foa::kNeverComplete;
            auto agent = std::make_unique<foa::MockAgent>(cfg);
            auto draft = agent->generate_draft("bench", "synthetic consensus load", "");
            agent->set_current_draft(*draft);
            cluster.members.push_back(agent->id());
            weights[agent->id()] = 1.0;
            members.push_back(agent.get());
            agents.push_back(std::move(agent));
        }
        auto before = broker.total_deliveries();
        auto result = foa::run_rounds(broker, cluster, members, weights, {3, true});
        std::printf("%-8zu %-8zu %-12llu %-12.4f\n", n, result.rounds_used,
                    static_cast<unsigned long long>(broker.total_deliveries() - before),
                    result.confidence);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"federation-of-agents scenario runner"};
    app.require_subcommand(1);

    std::string scenario_path, report_dir, sizes_csv = "4,8,16";
    std::uint64_t seed = 0, timeout_ms = 0;
    bool seed_set = false, timeout_set = false;

    auto* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("scenario", scenario_path, "scenario JSON path")->required();
    run->add_option("--seed", seed, "override the scenario seed")
        ->each([&](const std::string&) { seed_set = true; });
    run->add_option("--timeout-ms", timeout_ms, "override the logical timeout")
        ->each([&](const std::string&) { timeout_set = true; });
    run->add_option("--report-dir", report_dir, "write one report JSON per job");

    std::string bench_mode;
    auto* bench = app.add_subcommand("bench", "counter tables for the core stages");
    bench->add_option("mode", bench_mode, "routing | clustering | consensus")
        ->required()
        ->check(CLI::IsMember({"routing", "clustering", "consensus"}));
    bench->add_option("--sizes", sizes_csv, "comma separated problem sizes");
    bench->add_option("--seed", seed, "bench seed");

    CLI11_PARSE(app, argc, argv);

    if (bench->parsed()) {
        auto sizes = parse_sizes(sizes_csv);
        if (bench_mode == "routing") return bench_routing(sizes, seed);
        if (bench_mode == "clustering") return bench_clustering(sizes, seed);
        return bench_consensus(sizes, seed);
    }

    foa::Scenario scenario;
    try {
        scenario = foa::load_scenario(scenario_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (seed_set) scenario.seed = seed;
    if (timeout_set) scenario.config.timeout_ms = timeout_ms;

    foa::ScenarioRun outcome;
    try {
        outcome = foa::run_scenario(scenario);
    } catch (const std::exception& e) {
        std::cerr << "error: scenario aborted: " << e.what() << "\n";
        return 1;
    }

    for (const auto& report : outcome.reports) {
        std::cout << report.task_id << ": " << foa::to_string(report.phase);
        if (!report.diagnostic.empty()) std::cout << " (" << report.diagnostic << ")";
        std::cout << "\n";
        if (!report_dir.empty()) {
            std::ofstream out(report_dir + "/" + report.task_id + ".json");
            out << report.to_json().dump(2) << "\n";
        }
    }
    return outcome.all_done ? 0 : 1;
}
