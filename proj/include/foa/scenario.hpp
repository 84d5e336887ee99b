#pragma once

#include <string>
#include <vector>

#include "foa/agents.hpp"
#include "foa/orchestrator.hpp"

namespace foa {

// A declarative run description: orchestrator knobs, the agent pool, a
// submission blocklist and the job list, loaded from JSON.
struct Scenario {
    OrchestratorConfig config;
    std::vector<std::string> blocklist;
    std::vector<MockAgentConfig> agents;
    std::vector<JobRequest> tasks;
    std::uint64_t seed = 0;  // folded into every agent seed
};

// Parses a scenario document. Throws std::runtime_error with a readable
// message on malformed input. FOE_* environment variables override the
// matching decomposition and clustering knobs after parsing.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

void apply_env_overrides(OrchestratorConfig& config);

struct ScenarioRun {
    std::vector<JobReport> reports;
    bool all_done = true;
};

// Builds the broker, federation and orchestrator, registers the agents and
// runs every task in order.
ScenarioRun run_scenario(const Scenario& scenario);

}  // namespace foa
