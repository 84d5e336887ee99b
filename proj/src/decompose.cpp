#include "foa/decompose.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "foa/errors.hpp"

namespace foa {

void Proposal::validate() const {
    for (const auto& [from, to] : deps) {
        if (from >= subtasks.size() || to >= subtasks.size())
            throw std::invalid_argument("Proposal: dep index out of range");
        if (from == to) throw std::invalid_argument("Proposal: self-loop dep");
    }
}

nlohmann::json Proposal::to_json() const {
    nlohmann::json subs = nlohmann::json::array();
    for (const auto& s : subtasks) subs.push_back({{"description", s.description}});
    nlohmann::json dep_list = nlohmann::json::array();
    for (const auto& [from, to] : deps) dep_list.push_back({from, to});
    return {{"proposer_id", proposer_id}, {"subtasks", subs}, {"deps", dep_list}};
}

Proposal Proposal::from_json(const nlohmann::json& j) {
    Proposal p;
    p.proposer_id = j.at("proposer_id").get<std::string>();
    for (const auto& js : j.at("subtasks")) {
        ProposedSubtask s;
        s.description = js.at("description").get<std::string>();
        s.embedding = embed_text(s.description);
        p.subtasks.push_back(std::move(s));
    }
    for (const auto& jd : j.at("deps"))
        p.deps.emplace_back(jd.at(0).get<std::size_t>(), jd.at(1).get<std::size_t>());
    p.validate();
    return p;
}

std::vector<std::string> TaskDag::predecessors(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& [from, to] : edges)
        if (to == id) out.push_back(from);
    return out;
}

std::vector<std::string> TaskDag::successors(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& [from, to] : edges)
        if (from == id) out.push_back(to);
    return out;
}

std::optional<std::vector<std::string>> TaskDag::topological_order() const {
    std::map<std::string, std::size_t> in_degree;
    for (const auto& [id, _] : nodes) in_degree[id] = 0;
    for (const auto& [from, to] : edges) ++in_degree[to];

    // Kahn's algorithm with an ordered frontier for deterministic output.
    std::set<std::string> frontier;
    for (const auto& [id, deg] : in_degree)
        if (deg == 0) frontier.insert(id);

    std::vector<std::string> order;
    while (!frontier.empty()) {
        std::string id = *frontier.begin();
        frontier.erase(frontier.begin());
        order.push_back(id);
        for (const auto& succ : successors(id)) {
            if (--in_degree[succ] == 0) frontier.insert(succ);
        }
    }
    if (order.size() != nodes.size()) return std::nullopt;
    return order;
}

std::vector<std::size_t> select_candidates(const TaskSpec& task,
                                           const std::vector<AgentProfile>& agents,
                                           double threshold, std::size_t k_fallback) {
    if (threshold <= 0.0 || threshold >= 1.0)
        throw std::invalid_argument("select_candidates: threshold must be in (0,1)");
    if (k_fallback == 0)
        throw std::invalid_argument("select_candidates: k_fallback must be positive");
    if (agents.empty()) return {};

    struct Scored {
        double score;
        std::size_t index;
    };
    std::vector<Scored> qualified, by_cosine;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        double affinity = task_affinity(task.semantic, task.required_policies,
                                        task.resource_demand, agents[i]);
        if (affinity > threshold) qualified.push_back({affinity, i});
        by_cosine.push_back({cosine(task.semantic, agents[i].vcv.capability), i});
    }

    auto cmp = [&](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return agents[a.index].vcv.agent_id < agents[b.index].vcv.agent_id;
    };
    auto& pool = qualified.empty() ? by_cosine : qualified;
    std::sort(pool.begin(), pool.end(), cmp);
    if (pool.size() > k_fallback) pool.resize(k_fallback);

    std::vector<std::size_t> out;
    for (const auto& s : pool) out.push_back(s.index);
    return out;
}

std::optional<Proposal> clamp_proposal(Proposal proposal, std::size_t min_sub,
                                       std::size_t max_sub) {
    proposal.validate();
    if (proposal.subtasks.size() < min_sub) return std::nullopt;
    if (proposal.subtasks.size() > max_sub) {
        proposal.subtasks.resize(max_sub);
        std::erase_if(proposal.deps, [max_sub](const auto& d) {
            return d.first >= max_sub || d.second >= max_sub;
        });
    }
    return proposal;
}

std::vector<Proposal> collect_proposals(const std::vector<std::size_t>& candidates,
                                        const ProposalFetch& fetch, std::size_t min_sub,
                                        std::size_t max_sub) {
    std::vector<Proposal> out;
    for (std::size_t idx : candidates) {
        std::optional<Proposal> raw;
        try {
            raw = fetch(idx);
        } catch (const AgentTimeout&) {
            continue;  // skipped, not fatal
        }
        if (!raw) continue;
        if (auto clamped = clamp_proposal(std::move(*raw), min_sub, max_sub))
            out.push_back(std::move(*clamped));
    }
    return out;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

TaskDag merge_proposals(const std::vector<Proposal>& proposals, double merge_sim,
                        const TaskSpec& parent, std::size_t team_cap) {
    if (proposals.empty())
        throw EmptyDecomposition("merge_proposals: no proposals for task " + parent.task_id);

    struct Item {
        const ProposedSubtask* sub;
        std::size_t proposal;
        std::size_t local;
    };
    std::vector<Item> items;
    for (std::size_t p = 0; p < proposals.size(); ++p)
        for (std::size_t s = 0; s < proposals[p].subtasks.size(); ++s)
            items.push_back({&proposals[p].subtasks[s], p, s});

    UnionFind uf(items.size());
    for (std::size_t a = 0; a < items.size(); ++a)
        for (std::size_t b = a + 1; b < items.size(); ++b)
            if (cosine(items[a].sub->embedding, items[b].sub->embedding) >= merge_sim)
                uf.unite(a, b);

    // Canonical node per component: lexicographically smallest description,
    // normalized mean embedding.
    struct Canonical {
        std::string description;
        Vec mean;
        std::size_t count = 0;
        const ProposedSubtask* smallest = nullptr;
    };
    std::map<std::size_t, Canonical> components;
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto& c = components[uf.find(i)];
        const auto& sub = *items[i].sub;
        if (c.count == 0 || sub.description < c.description) {
            c.description = sub.description;
            c.smallest = items[i].sub;
        }
        if (c.mean.empty()) c.mean.assign(sub.embedding.size(), 0.0);
        for (std::size_t d = 0; d < sub.embedding.size(); ++d) c.mean[d] += sub.embedding[d];
        ++c.count;
    }

    // Deterministic ids: components ordered by canonical description.
    std::vector<std::pair<std::string, std::size_t>> ordered;  // description -> root
    for (const auto& [root, c] : components) ordered.emplace_back(c.description, root);
    std::sort(ordered.begin(), ordered.end());

    std::map<std::size_t, std::string> root_to_id;
    TaskDag dag;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        auto& c = components.at(ordered[i].second);
        std::string id = parent.task_id + ".s" + std::to_string(i);
        root_to_id[ordered[i].second] = id;

        Vec embedding = c.mean;
        if (norm(embedding) == 0.0) embedding = c.smallest->embedding;
        l2_normalize(embedding);

        SubtaskRequirement req;
        req.subtask_id = id;
        req.description = c.description;
        req.semantic = embedding;
        req.spec_requirement = embedding;
        req.required_policies = parent.required_policies;
        req.resource_demand = parent.resource_demand;
        req.team_cap = team_cap;
        dag.nodes.emplace(id, std::move(req));
    }

    // Remap proposal-local dep indices through the union-find.
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> flat;  // (proposal, local) -> item
    for (std::size_t i = 0; i < items.size(); ++i) flat[{items[i].proposal, items[i].local}] = i;
    for (const auto& prop : proposals) {
        std::size_t p = static_cast<std::size_t>(&prop - proposals.data());
        for (const auto& [from, to] : prop.deps) {
            const auto& a = root_to_id.at(uf.find(flat.at({p, from})));
            const auto& b = root_to_id.at(uf.find(flat.at({p, to})));
            if (a != b) dag.edges.emplace(a, b);
        }
    }
    return dag;
}

TaskDag validate_dag(TaskDag g) {
    // Drop dangling edges.
    std::erase_if(g.edges, [&](const auto& e) {
        return !g.nodes.count(e.first) || !g.nodes.count(e.second);
    });

    // Iteratively remove the lexicographically greatest edge inside each
    // strongly connected component until the graph is acyclic.
    while (!g.topological_order()) {
        // Tarjan SCC over the current edge set.
        std::map<std::string, std::size_t> index, lowlink, comp;
        std::vector<std::string> stack;
        std::map<std::string, bool> on_stack;
        std::size_t next_index = 0, next_comp = 0;

        std::function<void(const std::string&)> strongconnect = [&](const std::string& v) {
            index[v] = lowlink[v] = next_index++;
            stack.push_back(v);
            on_stack[v] = true;
            for (const auto& w : g.successors(v)) {
                if (!index.count(w)) {
                    strongconnect(w);
                    lowlink[v] = std::min(lowlink[v], lowlink[w]);
                } else if (on_stack[w]) {
                    lowlink[v] = std::min(lowlink[v], index[w]);
                }
            }
            if (lowlink[v] == index[v]) {
                while (true) {
                    std::string w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if (w == v) break;
                }
                ++next_comp;
            }
        };
        for (const auto& [id, _] : g.nodes)
            if (!index.count(id)) strongconnect(id);

        // In each multi-node SCC drop its greatest internal edge.
        std::map<std::size_t, std::size_t> comp_size;
        for (const auto& [id, c] : comp) ++comp_size[c];
        std::map<std::size_t, std::pair<std::string, std::string>> worst;
        for (const auto& e : g.edges) {
            std::size_t c = comp[e.first];
            if (comp[e.second] != c || comp_size[c] < 2) continue;
            auto it = worst.find(c);
            if (it == worst.end() || e > it->second) worst[c] = e;
        }
        for (const auto& [_, e] : worst) g.edges.erase(e);
    }
    return g;
}

}  // namespace foa
