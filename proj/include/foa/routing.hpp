#pragma once

#include <string>
#include <vector>

#include "foa/vcv.hpp"

namespace foa {

struct SubtaskRequirement {
    std::string subtask_id;
    std::string description;
    Vec semantic;           // c_s, unit-norm
    Bitset required_policies;  // p_s
    Vec resource_demand;    // r_s
    Vec spec_requirement;   // e_s, unit-norm
    std::size_t team_cap = 1;  // r_i, max agents on this subtask
};

struct AgentProfile {
    Vcv vcv;
    double reputation = 1.0;   // perf term, in [0,1]
    std::size_t capacity = 2;  // max concurrent subtasks
};

// Binary subtask-by-agent assignment; rows[i] holds the agent indices
// serving subtask i.
struct AssignmentMatrix {
    std::vector<std::vector<std::size_t>> rows;
    double objective = 0.0;

    bool assigned(std::size_t subtask, std::size_t agent) const;
};

// exp(-lambda * ||max(0, r_s - r_a)||_2); only shortfalls penalize.
double resource_penalty(const Vec& demand, const Vec& available, double lambda = 1.0);

// Cosine of the two spec embeddings.
double spec_alignment(const Vec& e_s, const Vec& e_a);

// true iff every required policy bit is set in the agent's set.
bool policy_gate(const Bitset& required, const Bitset& held);

// Four-factor score: cos(c_s, c_a) * gate * resource_penalty * spec_alignment.
// Exactly zero whenever the gate fails.
double compatibility_score(const SubtaskRequirement& s, const AgentProfile& a,
                           double lambda = 1.0);

// Three-factor score used for candidate selection at whole-task level
// (no spec-alignment term).
double task_affinity(const Vec& c_t, const Bitset& p_req, const Vec& r_req,
                     const AgentProfile& a, double lambda = 1.0);

// Maximizes sum x_ij * score_ij * rep_j subject to 1 <= row sum <= team_cap_i
// and column sum <= capacity_j. Entries with score*rep <= 0 are ineligible.
// Greedy + 2-swap local search; instances with k*n <= 30 are additionally
// solved exactly and the better result returned. Throws InfeasibleError
// naming the uncoverable subtasks.
AssignmentMatrix solve_assignment(const std::vector<std::vector<double>>& scores,
                                  const std::vector<double>& reputations,
                                  const std::vector<std::size_t>& team_caps,
                                  const std::vector<std::size_t>& capacities,
                                  const std::vector<std::string>& subtask_ids = {},
                                  const std::vector<std::string>& agent_ids = {});

// Exhaustive optimum for k*n <= 30; the oracle the solver is tested against.
double exhaustive_assignment_objective(const std::vector<std::vector<double>>& scores,
                                       const std::vector<double>& reputations,
                                       const std::vector<std::size_t>& team_caps,
                                       const std::vector<std::size_t>& capacities);

}  // namespace foa
