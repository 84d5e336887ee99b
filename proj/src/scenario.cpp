#include "foa/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "foa/hashing.hpp"

namespace foa {

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

MockAgentConfig parse_agent(const nlohmann::json& j) {
    MockAgentConfig cfg;
    cfg.agent_id = j.at("agent_id").get<std::string>();
    if (j.contains("spec")) {
        const auto& s = j.at("spec");
        cfg.spec.agent_id = cfg.agent_id;
        read_if(s, "goals", cfg.spec.goals);
        read_if(s, "rules", cfg.spec.rules);
        read_if(s, "tools", cfg.spec.tools);
    } else {
        cfg.spec.agent_id = cfg.agent_id;
    }
    read_if(j, "skills", cfg.skills);
    read_if(j, "resources", cfg.resources);
    read_if(j, "policy_bits", cfg.policy_bits);
    read_if(j, "seed", cfg.seed);
    read_if(j, "reputation", cfg.reputation);
    read_if(j, "capacity", cfg.capacity);
    read_if(j, "complete_after_round", cfg.complete_after_round);
    if (j.contains("never_complete") && j.at("never_complete").get<bool>())
        cfg.complete_after_round = kNeverComplete;
    if (j.contains("fail_update_at_round"))
        cfg.fail_update_at_round = j.at("fail_update_at_round").get<std::size_t>();
    read_if(j, "fail_decompose", cfg.fail_decompose);
    read_if(j, "fail_draft", cfg.fail_draft);
    read_if(j, "refuse_pattern", cfg.refuse_pattern);
    read_if(j, "token_budget", cfg.token_budget);
    if (j.contains("proposals")) {
        for (const auto& [task_id, p] : j.at("proposals").items()) {
            ScriptedProposal script;
            script.subtasks = p.at("subtasks").get<std::vector<std::string>>();
            if (p.contains("deps")) {
                for (const auto& d : p.at("deps"))
                    script.deps.emplace_back(d.at(0).get<std::size_t>(),
                                             d.at(1).get<std::size_t>());
            }
            cfg.proposals[task_id] = std::move(script);
        }
    }
    if (j.contains("tools_lookup")) {
        for (const auto& [name, table] : j.at("tools_lookup").items()) {
            ToolStub tool;
            tool.name = name;
            for (const auto& [key, text] : table.items())
                tool.lookup[key] = text.get<std::string>();
            cfg.tools.push_back(std::move(tool));
        }
    }
    if (cfg.resources.size() != kResourceDim)
        throw std::runtime_error("agent " + cfg.agent_id + ": resources needs " +
                                 std::to_string(kResourceDim) + " entries");
    return cfg;
}

JobRequest parse_task(const nlohmann::json& j) {
    JobRequest req;
    req.task_id = j.at("task_id").get<std::string>();
    req.description = j.at("description").get<std::string>();
    read_if(j, "policy_bits", req.policy_bits);
    read_if(j, "resource_demand", req.resource_demand);
    read_if(j, "outcome_score", req.outcome_score);
    if (req.resource_demand.size() != kResourceDim)
        throw std::runtime_error("task " + req.task_id + ": resource_demand needs " +
                                 std::to_string(kResourceDim) + " entries");
    return req;
}

void parse_config(const nlohmann::json& j, OrchestratorConfig& cfg) {
    if (j.contains("decomp")) {
        const auto& d = j.at("decomp");
        read_if(d, "threshold", cfg.decomp.threshold);
        read_if(d, "max_agents", cfg.decomp.max_agents);
        read_if(d, "subtasks_min", cfg.decomp.subtasks_min);
        read_if(d, "subtasks_max", cfg.decomp.subtasks_max);
        read_if(d, "merge_sim", cfg.decomp.merge_sim);
    }
    if (j.contains("cluster_weights")) {
        const auto& w = j.at("cluster_weights");
        read_if(w, "capability", cfg.cluster_weights.capability);
        read_if(w, "resource", cfg.cluster_weights.resource);
        read_if(w, "draft", cfg.cluster_weights.draft);
        read_if(w, "spec", cfg.cluster_weights.spec);
    }
    read_if(j, "cluster_cut", cfg.cluster_cut);
    read_if(j, "cluster_max_size", cfg.cluster_max_size);
    read_if(j, "rounds", cfg.rounds);
    read_if(j, "majority_stop", cfg.majority_stop);
    read_if(j, "team_cap", cfg.team_cap);
    if (j.contains("synth_mode"))
        cfg.synth_mode = synth_mode_from_string(j.at("synth_mode").get<std::string>());
    read_if(j, "audit_gate_fail", cfg.audit_gate_fail);
    read_if(j, "timeout_ms", cfg.timeout_ms);
    read_if(j, "reputation_beta", cfg.reputation_beta);
}

void env_override_double(const char* name, double& out) {
    if (const char* v = std::getenv(name)) out = std::stod(v);
}

void env_override_size(const char* name, std::size_t& out) {
    if (const char* v = std::getenv(name)) out = static_cast<std::size_t>(std::stoull(v));
}

}  // namespace

void apply_env_overrides(OrchestratorConfig& config) {
    env_override_double("FOE_DECOMP_THRESHOLD", config.decomp.threshold);
    env_override_size("FOE_DECOMP_MAX_AGENTS", config.decomp.max_agents);
    env_override_size("FOE_DECOMP_SUBTASKS_MIN", config.decomp.subtasks_min);
    env_override_size("FOE_DECOMP_SUBTASKS_MAX", config.decomp.subtasks_max);
    env_override_double("FOE_DECOMP_MERGE_SIM", config.decomp.merge_sim);
    env_override_double("FOE_CLUSTER_SIM_THRESHOLD", config.cluster_cut);
}

Scenario parse_scenario(const nlohmann::json& j) {
    Scenario scenario;
    if (j.contains("config")) parse_config(j.at("config"), scenario.config);
    read_if(j, "blocklist", scenario.blocklist);
    read_if(j, "seed", scenario.seed);
    if (!j.contains("agents") || j.at("agents").empty())
        throw std::runtime_error("scenario: at least one agent is required");
    for (const auto& a : j.at("agents")) scenario.agents.push_back(parse_agent(a));
    if (!j.contains("tasks") || j.at("tasks").empty())
        throw std::runtime_error("scenario: at least one task is required");
    for (const auto& t : j.at("tasks")) scenario.tasks.push_back(parse_task(t));
    apply_env_overrides(scenario.config);
    return scenario;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("scenario parse error in " + path + ": " + e.what());
    }
    try {
        return parse_scenario(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("scenario schema error in " + path + ": " + e.what());
    }
}

ScenarioRun run_scenario(const Scenario& scenario) {
    Broker broker;
    Federation federation(broker);
    for (MockAgentConfig cfg : scenario.agents) {
        cfg.seed = mix64(cfg.seed ^ scenario.seed);
        federation.register_agent(std::move(cfg));
    }
    broker.flush();

    BloomFilter blocklist;
    for (const auto& word : scenario.blocklist) blocklist.insert(word);

    Orchestrator orchestrator(broker, federation, scenario.config, std::move(blocklist));

    ScenarioRun run;
    for (const auto& task : scenario.tasks) {
        JobReport report = orchestrator.run_job(task);
        if (report.phase != Phase::Done) run.all_done = false;
        run.reports.push_back(std::move(report));
    }
    return run;
}

}  // namespace foa
