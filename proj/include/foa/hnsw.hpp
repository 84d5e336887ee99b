#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "foa/embedding.hpp"

#include "json.hpp"

namespace foa {

struct HnswParams {
    std::size_t M = 16;               // max neighbors per node above level 0
    std::size_t ef_construction = 200;
    std::size_t ef_search = 64;

    double level_lambda() const;      // 1 / ln(M)
    void validate() const;
};

struct SearchHit {
    std::string agent_id;
    double similarity;  // cosine on unit vectors
};

// Single HNSW graph over unit vectors; distance is 1 - cosine. Deletions
// are tombstones; the graph compacts itself via rebuild once more than a
// quarter of its nodes are dead.
class HnswGraph {
public:
    explicit HnswGraph(HnswParams params = {}, std::uint64_t seed = 1);

    // Adds a point. The caller (ShardedIndex) handles versioning; an id
    // already present is tombstoned and re-inserted.
    void insert(const std::string& id, Vec vec);
    void remove(const std::string& id);
    bool contains(const std::string& id) const;

    std::vector<SearchHit> search(const Vec& query, std::size_t k) const;
    std::vector<SearchHit> search(const Vec& query, std::size_t k, std::size_t ef) const;

    std::size_t live_count() const { return live_count_; }
    std::size_t node_count() const { return nodes_.size(); }
    const HnswParams& params() const { return params_; }

    // Neighbor-degree invariant check: <= M above level 0, <= 2M at level 0.
    bool degrees_within_bounds() const;

    nlohmann::json to_json() const;
    static HnswGraph from_json(const nlohmann::json& j, HnswParams params, std::uint64_t seed);

private:
    struct Node {
        std::string id;
        Vec vec;
        bool dead = false;
        std::vector<std::vector<std::uint32_t>> neighbors;  // per level
    };

    std::size_t max_degree(std::size_t level) const;
    double dist(const Vec& a, const Vec& b) const;
    std::size_t draw_level();
    std::vector<std::uint32_t> search_layer(const Vec& query, std::uint32_t entry,
                                            std::size_t ef, std::size_t level) const;
    void link(std::uint32_t from, std::uint32_t to, std::size_t level);
    void maybe_rebuild();

    HnswParams params_;
    std::mt19937_64 rng_;
    std::vector<Node> nodes_;
    std::int64_t entry_point_ = -1;
    std::size_t top_level_ = 0;
    std::size_t live_count_ = 0;
    std::unordered_map<std::string, std::uint32_t> by_id_;
};

}  // namespace foa
