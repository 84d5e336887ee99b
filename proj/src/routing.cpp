#include "foa/routing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "foa/errors.hpp"

namespace foa {

namespace {
constexpr double kEps = 1e-12;
}

bool AssignmentMatrix::assigned(std::size_t subtask, std::size_t agent) const {
    const auto& row = rows.at(subtask);
    return std::find(row.begin(), row.end(), agent) != row.end();
}

double resource_penalty(const Vec& demand, const Vec& available, double lambda) {
    if (demand.size() != available.size())
        throw std::invalid_argument("resource_penalty: dimension mismatch");
    double gap_sq = 0.0;
    for (std::size_t i = 0; i < demand.size(); ++i) {
        double gap = std::max(0.0, demand[i] - available[i]);
        gap_sq += gap * gap;
    }
    return std::exp(-lambda * std::sqrt(gap_sq));
}

double spec_alignment(const Vec& e_s, const Vec& e_a) { return cosine(e_s, e_a); }

bool policy_gate(const Bitset& required, const Bitset& held) {
    return required.is_subset_of(held);
}

double compatibility_score(const SubtaskRequirement& s, const AgentProfile& a, double lambda) {
    if (!policy_gate(s.required_policies, a.vcv.policies)) return 0.0;
    return cosine(s.semantic, a.vcv.capability) *
           resource_penalty(s.resource_demand, a.vcv.resources, lambda) *
           spec_alignment(s.spec_requirement, a.vcv.spec_embedding);
}

double task_affinity(const Vec& c_t, const Bitset& p_req, const Vec& r_req,
                     const AgentProfile& a, double lambda) {
    if (!policy_gate(p_req, a.vcv.policies)) return 0.0;
    return cosine(c_t, a.vcv.capability) * resource_penalty(r_req, a.vcv.resources, lambda);
}

namespace {

struct Instance {
    std::size_t k, n;
    std::vector<std::vector<double>> util;  // score * reputation
    std::vector<std::size_t> team_caps;
    std::vector<std::size_t> capacities;

    bool eligible(std::size_t i, std::size_t j) const { return util[i][j] > 0.0; }
};

double objective_of(const Instance& inst, const std::vector<std::vector<std::size_t>>& rows) {
    double obj = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j : rows[i]) obj += inst.util[i][j];
    return obj;
}

// Kuhn-style augmenting search providing one agent per uncovered row under
// the remaining column capacities.
bool augment(const Instance& inst, std::size_t row,
             std::vector<std::vector<std::size_t>>& rows, std::vector<std::size_t>& col_load,
             std::vector<char>& visited) {
    for (std::size_t j = 0; j < inst.n; ++j) {
        if (!inst.eligible(row, j) || visited[j]) continue;
        visited[j] = 1;
        if (col_load[j] < inst.capacities[j]) {
            rows[row].push_back(j);
            ++col_load[j];
            return true;
        }
        // Try to free a slot of j held by a row with >1 assignments, or by
        // rerouting some single-assigned row elsewhere.
        for (std::size_t i2 = 0; i2 < inst.k; ++i2) {
            auto it = std::find(rows[i2].begin(), rows[i2].end(), j);
            if (it == rows[i2].end()) continue;
            if (rows[i2].size() > 1) {
                rows[i2].erase(it);
                rows[row].push_back(j);
                return true;
            }
            rows[i2].erase(it);
            --col_load[j];
            if (augment(inst, i2, rows, col_load, visited)) {
                rows[row].push_back(j);
                ++col_load[j];
                return true;
            }
            rows[i2].push_back(j);
            ++col_load[j];
        }
    }
    return false;
}

std::vector<std::vector<std::size_t>> greedy_with_repair(
    const Instance& inst, const std::vector<std::string>& subtask_ids,
    const std::vector<std::string>& agent_ids) {
    struct Cand {
        double u;
        std::size_t i, j;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < inst.k; ++i)
        for (std::size_t j = 0; j < inst.n; ++j)
            if (inst.eligible(i, j)) cands.push_back({inst.util[i][j], i, j});
    std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
        if (a.u != b.u) return a.u > b.u;
        if (subtask_ids[a.i] != subtask_ids[b.i]) return subtask_ids[a.i] < subtask_ids[b.i];
        return agent_ids[a.j] < agent_ids[b.j];
    });

    std::vector<std::vector<std::size_t>> rows(inst.k);
    std::vector<std::size_t> col_load(inst.n, 0);

    // Cover pass: one agent per subtask first.
    for (const auto& c : cands) {
        if (!rows[c.i].empty() || col_load[c.j] >= inst.capacities[c.j]) continue;
        rows[c.i].push_back(c.j);
        ++col_load[c.j];
    }
    // Repair uncovered rows via augmenting paths.
    std::vector<std::string> uncovered;
    for (std::size_t i = 0; i < inst.k; ++i) {
        if (!rows[i].empty()) continue;
        std::vector<char> visited(inst.n, 0);
        if (!augment(inst, i, rows, col_load, visited)) uncovered.push_back(subtask_ids[i]);
    }
    if (!uncovered.empty()) {
        std::string msg = "solve_assignment: no eligible agent for subtasks:";
        for (const auto& s : uncovered) msg += " " + s;
        throw InfeasibleError(msg, uncovered);
    }
    // Recompute loads (repair may have shuffled rows).
    std::fill(col_load.begin(), col_load.end(), 0);
    for (const auto& row : rows)
        for (std::size_t j : row) ++col_load[j];

    // Fill pass: extra team members while utility is positive.
    for (const auto& c : cands) {
        if (rows[c.i].size() >= inst.team_caps[c.i]) continue;
        if (col_load[c.j] >= inst.capacities[c.j]) continue;
        if (std::find(rows[c.i].begin(), rows[c.i].end(), c.j) != rows[c.i].end()) continue;
        rows[c.i].push_back(c.j);
        ++col_load[c.j];
    }
    return rows;
}

void local_search(const Instance& inst, std::vector<std::vector<std::size_t>>& rows) {
    std::vector<std::size_t> col_load(inst.n, 0);
    for (const auto& row : rows)
        for (std::size_t j : row) ++col_load[j];

    bool improved = true;
    while (improved) {
        improved = false;
        // Move one assignment to a better free agent.
        for (std::size_t i = 0; i < inst.k && !improved; ++i) {
            for (std::size_t a = 0; a < rows[i].size() && !improved; ++a) {
                std::size_t j = rows[i][a];
                for (std::size_t j2 = 0; j2 < inst.n; ++j2) {
                    if (j2 == j || !inst.eligible(i, j2)) continue;
                    if (col_load[j2] >= inst.capacities[j2]) continue;
                    if (std::find(rows[i].begin(), rows[i].end(), j2) != rows[i].end()) continue;
                    if (inst.util[i][j2] > inst.util[i][j] + kEps) {
                        rows[i][a] = j2;
                        --col_load[j];
                        ++col_load[j2];
                        improved = true;
                        break;
                    }
                }
            }
        }
        if (improved) continue;
        // Pairwise exchange between two rows.
        for (std::size_t i1 = 0; i1 < inst.k && !improved; ++i1) {
            for (std::size_t i2 = i1 + 1; i2 < inst.k && !improved; ++i2) {
                for (std::size_t a = 0; a < rows[i1].size() && !improved; ++a) {
                    for (std::size_t b = 0; b < rows[i2].size() && !improved; ++b) {
                        std::size_t j1 = rows[i1][a], j2 = rows[i2][b];
                        if (j1 == j2) continue;
                        if (!inst.eligible(i1, j2) || !inst.eligible(i2, j1)) continue;
                        if (std::find(rows[i1].begin(), rows[i1].end(), j2) != rows[i1].end())
                            continue;
                        if (std::find(rows[i2].begin(), rows[i2].end(), j1) != rows[i2].end())
                            continue;
                        double gain = inst.util[i1][j2] + inst.util[i2][j1] -
                                      inst.util[i1][j1] - inst.util[i2][j2];
                        if (gain > kEps) {
                            rows[i1][a] = j2;
                            rows[i2][b] = j1;
                            improved = true;
                        }
                    }
                }
            }
        }
        if (improved) continue;
        // Grow a team where capacity allows.
        for (std::size_t i = 0; i < inst.k && !improved; ++i) {
            if (rows[i].size() >= inst.team_caps[i]) continue;
            for (std::size_t j = 0; j < inst.n; ++j) {
                if (!inst.eligible(i, j) || col_load[j] >= inst.capacities[j]) continue;
                if (std::find(rows[i].begin(), rows[i].end(), j) != rows[i].end()) continue;
                rows[i].push_back(j);
                ++col_load[j];
                improved = true;
                break;
            }
        }
    }
}

// Exact branch and bound over per-row agent subsets; only used at k*n <= 30.
struct ExactSolver {
    const Instance& inst;
    std::vector<std::vector<std::pair<double, std::vector<std::size_t>>>> row_options;
    std::vector<double> suffix_best;  // optimistic bound ignoring capacity
    std::vector<std::size_t> col_load;
    std::vector<std::vector<std::size_t>> best_rows;
    double best = -1.0;
    bool found = false;

    explicit ExactSolver(const Instance& in) : inst(in), col_load(in.n, 0) {
        row_options.resize(inst.k);
        for (std::size_t i = 0; i < inst.k; ++i) {
            std::vector<std::size_t> elig;
            for (std::size_t j = 0; j < inst.n; ++j)
                if (inst.eligible(i, j)) elig.push_back(j);
            // All subsets of eligible agents with size in [1, team_cap].
            std::vector<std::size_t> combo;
            auto enumerate = [&](auto&& self, std::size_t start) -> void {
                if (!combo.empty()) {
                    double u = 0.0;
                    for (std::size_t j : combo) u += inst.util[i][j];
                    row_options[i].push_back({u, combo});
                }
                if (combo.size() >= inst.team_caps[i]) return;
                for (std::size_t b = start; b < elig.size(); ++b) {
                    combo.push_back(elig[b]);
                    self(self, b + 1);
                    combo.pop_back();
                }
            };
            enumerate(enumerate, 0);
            std::sort(row_options[i].begin(), row_options[i].end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
        }
        suffix_best.assign(inst.k + 1, 0.0);
        for (std::size_t i = inst.k; i-- > 0;) {
            double top = row_options[i].empty() ? 0.0 : row_options[i].front().first;
            suffix_best[i] = suffix_best[i + 1] + top;
        }
        best_rows.resize(inst.k);
    }

    void dfs(std::size_t row, double acc, std::vector<std::vector<std::size_t>>& cur) {
        if (row == inst.k) {
            if (!found || acc > best) {
                best = acc;
                best_rows = cur;
                found = true;
            }
            return;
        }
        if (found && acc + suffix_best[row] <= best + kEps) return;
        for (const auto& [u, members] : row_options[row]) {
            if (found && acc + u + suffix_best[row + 1] <= best + kEps) break;
            bool ok = true;
            for (std::size_t j : members)
                if (col_load[j] >= inst.capacities[j]) { ok = false; break; }
            if (!ok) continue;
            for (std::size_t j : members) ++col_load[j];
            cur[row] = members;
            dfs(row + 1, acc + u, cur);
            for (std::size_t j : members) --col_load[j];
        }
    }

    bool solve() {
        std::vector<std::vector<std::size_t>> cur(inst.k);
        dfs(0, 0.0, cur);
        return found;
    }
};

}  // namespace

AssignmentMatrix solve_assignment(const std::vector<std::vector<double>>& scores,
                                  const std::vector<double>& reputations,
                                  const std::vector<std::size_t>& team_caps,
                                  const std::vector<std::size_t>& capacities,
                                  const std::vector<std::string>& subtask_ids_in,
                                  const std::vector<std::string>& agent_ids_in) {
    std::size_t k = scores.size();
    if (k == 0) throw std::invalid_argument("solve_assignment: need at least one subtask");
    std::size_t n = scores[0].size();
    if (n == 0) throw std::invalid_argument("solve_assignment: need at least one agent");
    if (reputations.size() != n || team_caps.size() != k || capacities.size() != n)
        throw std::invalid_argument("solve_assignment: shape mismatch");

    auto subtask_ids = subtask_ids_in;
    auto agent_ids = agent_ids_in;
    auto pad = [](std::vector<std::string>& ids, std::size_t count, char prefix) {
        if (!ids.empty()) return;
        for (std::size_t i = 0; i < count; ++i)
            ids.push_back(std::string(1, prefix) + std::to_string(i));
    };
    pad(subtask_ids, k, 's');
    pad(agent_ids, n, 'a');

    Instance inst;
    inst.k = k;
    inst.n = n;
    inst.team_caps = team_caps;
    inst.capacities = capacities;
    inst.util.assign(k, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        if (scores[i].size() != n) throw std::invalid_argument("solve_assignment: ragged scores");
        for (std::size_t j = 0; j < n; ++j) inst.util[i][j] = scores[i][j] * reputations[j];
    }

    AssignmentMatrix result;
    result.rows = greedy_with_repair(inst, subtask_ids, agent_ids);
    local_search(inst, result.rows);
    result.objective = objective_of(inst, result.rows);

    if (k * n <= 30) {
        ExactSolver exact(inst);
        if (exact.solve() && exact.best > result.objective + kEps) {
            result.rows = exact.best_rows;
            result.objective = exact.best;
        }
    }
    for (auto& row : result.rows) std::sort(row.begin(), row.end());
    return result;
}

double exhaustive_assignment_objective(const std::vector<std::vector<double>>& scores,
                                       const std::vector<double>& reputations,
                                       const std::vector<std::size_t>& team_caps,
                                       const std::vector<std::size_t>& capacities) {
    std::size_t k = scores.size(), n = scores.empty() ? 0 : scores[0].size();
    if (k * n > 30) throw std::invalid_argument("exhaustive oracle limited to k*n <= 30");
    Instance inst;
    inst.k = k;
    inst.n = n;
    inst.team_caps = team_caps;
    inst.capacities = capacities;
    inst.util.assign(k, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j) inst.util[i][j] = scores[i][j] * reputations[j];
    ExactSolver exact(inst);
    if (!exact.solve()) {
        std::vector<std::string> uncovered;
        throw InfeasibleError("exhaustive oracle: infeasible instance", uncovered);
    }
    return exact.best;
}

}  // namespace foa
