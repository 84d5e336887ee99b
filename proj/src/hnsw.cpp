#include "foa/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_set>

namespace foa {

double HnswParams::level_lambda() const { return 1.0 / std::log(static_cast<double>(M)); }

void HnswParams::validate() const {
    if (M < 2) throw std::invalid_argument("HnswParams: M must be >= 2");
    if (ef_construction == 0 || ef_search == 0)
        throw std::invalid_argument("HnswParams: beam widths must be positive");
}

HnswGraph::HnswGraph(HnswParams params, std::uint64_t seed)
    : params_(params), rng_(seed) {
    params_.validate();
}

std::size_t HnswGraph::max_degree(std::size_t level) const {
    return level == 0 ? 2 * params_.M : params_.M;
}

double HnswGraph::dist(const Vec& a, const Vec& b) const { return 1.0 - dot(a, b); }

std::size_t HnswGraph::draw_level() {
    double u = std::uniform_real_distribution<double>(
        std::numeric_limits<double>::min(), 1.0)(rng_);
    return static_cast<std::size_t>(-std::log(u) * params_.level_lambda());
}

std::vector<std::uint32_t> HnswGraph::search_layer(const Vec& query, std::uint32_t entry,
                                                   std::size_t ef, std::size_t level) const {
    using Scored = std::pair<double, std::uint32_t>;
    std::priority_queue<Scored, std::vector<Scored>, std::greater<>> candidates;  // min-dist first
    std::priority_queue<Scored> best;                                             // max-dist first
    std::unordered_set<std::uint32_t> visited;

    double d0 = dist(query, nodes_[entry].vec);
    candidates.emplace(d0, entry);
    best.emplace(d0, entry);
    visited.insert(entry);

    while (!candidates.empty()) {
        auto [d, node] = candidates.top();
        candidates.pop();
        if (d > best.top().first && best.size() >= ef) break;
        for (std::uint32_t nb : nodes_[node].neighbors[level]) {
            if (!visited.insert(nb).second) continue;
            double dn = dist(query, nodes_[nb].vec);
            if (best.size() < ef || dn < best.top().first) {
                candidates.emplace(dn, nb);
                best.emplace(dn, nb);
                if (best.size() > ef) best.pop();
            }
        }
    }
    std::vector<std::uint32_t> out;
    out.reserve(best.size());
    while (!best.empty()) {
        out.push_back(best.top().second);
        best.pop();
    }
    std::reverse(out.begin(), out.end());  // closest first
    return out;
}

void HnswGraph::link(std::uint32_t from, std::uint32_t to, std::size_t level) {
    auto& adj = nodes_[from].neighbors[level];
    adj.push_back(to);
    std::size_t cap = max_degree(level);
    if (adj.size() > cap) {
        // Keep the `cap` closest neighbors.
        const Vec& base = nodes_[from].vec;
        std::sort(adj.begin(), adj.end(), [&](std::uint32_t a, std::uint32_t b) {
            double da = dist(base, nodes_[a].vec), db = dist(base, nodes_[b].vec);
            if (da != db) return da < db;
            return nodes_[a].id < nodes_[b].id;
        });
        adj.resize(cap);
    }
}

void HnswGraph::insert(const std::string& id, Vec vec) {
    if (!is_unit(vec)) throw std::invalid_argument("HnswGraph::insert: vector not unit-norm");
    if (auto it = by_id_.find(id); it != by_id_.end()) remove(id);

    std::size_t level = draw_level();
    Node node;
    node.id = id;
    node.vec = std::move(vec);
    node.neighbors.resize(level + 1);
    std::uint32_t idx = static_cast<std::uint32_t>(nodes_.size());

    if (entry_point_ < 0) {
        nodes_.push_back(std::move(node));
        by_id_[id] = idx;
        entry_point_ = idx;
        top_level_ = level;
        ++live_count_;
        return;
    }

    std::uint32_t entry = static_cast<std::uint32_t>(entry_point_);
    // Greedy descent through levels above the new node's level.
    for (std::size_t l = top_level_; l > level; --l) {
        entry = search_layer(node.vec, entry, 1, l).front();
    }
    nodes_.push_back(std::move(node));
    by_id_[id] = idx;
    ++live_count_;

    for (std::size_t l = std::min(level, top_level_);; --l) {
        auto found = search_layer(nodes_[idx].vec, entry, params_.ef_construction, l);
        std::size_t m = std::min(params_.M, found.size());
        for (std::size_t i = 0; i < m; ++i) {
            link(idx, found[i], l);
            link(found[i], idx, l);
        }
        if (!found.empty()) entry = found.front();
        if (l == 0) break;
    }

    if (level > top_level_) {
        top_level_ = level;
        entry_point_ = idx;
    }
}

void HnswGraph::remove(const std::string& id) {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return;
    Node& node = nodes_[it->second];
    if (!node.dead) {
        node.dead = true;
        --live_count_;
    }
    by_id_.erase(it);
    maybe_rebuild();
}

bool HnswGraph::contains(const std::string& id) const { return by_id_.count(id) > 0; }

void HnswGraph::maybe_rebuild() {
    if (nodes_.empty()) return;
    std::size_t dead = nodes_.size() - live_count_;
    if (dead * 4 <= nodes_.size()) return;

    std::vector<Node> old;
    old.swap(nodes_);
    by_id_.clear();
    entry_point_ = -1;
    top_level_ = 0;
    live_count_ = 0;
    for (auto& n : old) {
        if (!n.dead) insert(n.id, std::move(n.vec));
    }
}

std::vector<SearchHit> HnswGraph::search(const Vec& query, std::size_t k) const {
    return search(query, k, params_.ef_search);
}

std::vector<SearchHit> HnswGraph::search(const Vec& query, std::size_t k, std::size_t ef) const {
    if (!is_unit(query)) throw std::invalid_argument("HnswGraph::search: query not unit-norm");
    if (k == 0) throw std::invalid_argument("HnswGraph::search: k must be positive");
    if (live_count_ == 0) return {};

    std::vector<SearchHit> hits;
    if (ef >= live_count_) {
        // Exactness fallback: scan everything.
        for (const auto& n : nodes_) {
            if (!n.dead) hits.push_back({n.id, dot(query, n.vec)});
        }
    } else {
        std::uint32_t entry = static_cast<std::uint32_t>(entry_point_);
        for (std::size_t l = top_level_; l > 0; --l) {
            entry = search_layer(query, entry, 1, l).front();
        }
        auto found = search_layer(query, entry, std::max(ef, k), 0);
        for (std::uint32_t i : found) {
            const Node& n = nodes_[i];
            if (!n.dead && by_id_.count(n.id) && by_id_.at(n.id) == i)
                hits.push_back({n.id, dot(query, n.vec)});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.agent_id < b.agent_id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

bool HnswGraph::degrees_within_bounds() const {
    for (const auto& n : nodes_) {
        for (std::size_t l = 0; l < n.neighbors.size(); ++l) {
            if (n.neighbors[l].size() > max_degree(l)) return false;
        }
    }
    return true;
}

nlohmann::json HnswGraph::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_) {
        nodes.push_back({{"id", n.id},
                         {"vec", n.vec},
                         {"dead", n.dead},
                         {"neighbors", n.neighbors}});
    }
    return {{"nodes", nodes},
            {"entry_point", entry_point_},
            {"top_level", top_level_}};
}

HnswGraph HnswGraph::from_json(const nlohmann::json& j, HnswParams params, std::uint64_t seed) {
    HnswGraph g(params, seed);
    for (const auto& jn : j.at("nodes")) {
        Node n;
        n.id = jn.at("id").get<std::string>();
        n.vec = jn.at("vec").get<Vec>();
        n.dead = jn.at("dead").get<bool>();
        n.neighbors = jn.at("neighbors").get<std::vector<std::vector<std::uint32_t>>>();
        if (!n.dead) {
            g.by_id_[n.id] = static_cast<std::uint32_t>(g.nodes_.size());
            ++g.live_count_;
        }
        g.nodes_.push_back(std::move(n));
    }
    g.entry_point_ = j.at("entry_point").get<std::int64_t>();
    g.top_level_ = j.at("top_level").get<std::size_t>();
    return g;
}

}  // namespace foa
