#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "foa/routing.hpp"

namespace foa {

struct TaskSpec {
    std::string task_id;
    std::string description;
    Vec semantic;            // c_t, unit-norm embedding of the description
    Bitset required_policies;
    Vec resource_demand;
};

struct ProposedSubtask {
    std::string description;
    Vec embedding;
};

struct Proposal {
    std::string proposer_id;
    std::vector<ProposedSubtask> subtasks;
    std::vector<std::pair<std::size_t, std::size_t>> deps;  // index pairs, from -> to

    void validate() const;  // in-range indices, no self-loops

    nlohmann::json to_json() const;
    static Proposal from_json(const nlohmann::json& j);
};

struct TaskDag {
    std::map<std::string, SubtaskRequirement> nodes;
    std::set<std::pair<std::string, std::string>> edges;  // prerequisite -> dependent

    std::vector<std::string> predecessors(const std::string& id) const;
    std::vector<std::string> successors(const std::string& id) const;
    // Topological order, ties by ascending subtask_id; nullopt on a cycle.
    std::optional<std::vector<std::string>> topological_order() const;
};

struct DecomposeConfig {
    double threshold = 0.3;       // FOE_DECOMP_THRESHOLD
    std::size_t max_agents = 4;   // FOE_DECOMP_MAX_AGENTS
    std::size_t subtasks_min = 2; // FOE_DECOMP_SUBTASKS_MIN
    std::size_t subtasks_max = 4; // FOE_DECOMP_SUBTASKS_MAX
    double merge_sim = 0.5;       // FOE_DECOMP_MERGE_SIM
};

// All agents with task affinity above the threshold, best-first and capped
// at max_agents; falls back to the top-k by capability cosine when nobody
// clears the threshold.
std::vector<std::size_t> select_candidates(const TaskSpec& task,
                                           const std::vector<AgentProfile>& agents,
                                           double threshold, std::size_t k_fallback);

// Clamps a raw proposal to the [min, max] subtask bounds: truncates above
// max, rejects (nullopt) below min.
std::optional<Proposal> clamp_proposal(Proposal proposal, std::size_t min_sub,
                                       std::size_t max_sub);

using ProposalFetch = std::function<std::optional<Proposal>(std::size_t agent_index)>;

// Invokes each candidate's DECOMPOSE interface; timed-out or rejected
// proposals are skipped.
std::vector<Proposal> collect_proposals(const std::vector<std::size_t>& candidates,
                                        const ProposalFetch& fetch, std::size_t min_sub,
                                        std::size_t max_sub);

// Union of all proposed subtasks with transitive merging of pairs whose
// embedding cosine clears merge_sim. Canonical description is the
// lexicographically smallest member; canonical embedding the normalized
// mean. Edges are remapped, deduplicated, self-edges dropped. Node policy
// and resource requirements are inherited from the parent task.
TaskDag merge_proposals(const std::vector<Proposal>& proposals, double merge_sim,
                        const TaskSpec& parent, std::size_t team_cap);

// Breaks cycles deterministically: within each strongly connected
// component, drop the lexicographically greatest internal edge, repeat.
// Dangling edges are removed first. Always succeeds.
TaskDag validate_dag(TaskDag g);

}  // namespace foa
