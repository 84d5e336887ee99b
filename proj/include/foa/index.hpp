#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "foa/hnsw.hpp"
#include "foa/vcv.hpp"

namespace foa {

// Sharded HNSW index over VCV capability embeddings. Each agent lives in
// exactly one shard (stable hash of agent_id); inserts supersede by version,
// stale versions are no-ops.
class ShardedIndex {
public:
    static constexpr std::size_t kDefaultShards = 4;

    explicit ShardedIndex(std::size_t dim, std::size_t shards = kDefaultShards,
                          HnswParams params = {}, std::uint64_t seed = 1);

    // Indexes vcv.capability under vcv.agent_id. Returns true when the index
    // changed (new agent or newer version).
    bool insert(const Vcv& vcv);
    bool insert(const std::string& agent_id, const Vec& capability, std::uint64_t version);

    std::vector<SearchHit> search(const Vec& query, std::size_t k) const;
    std::vector<SearchHit> search(const Vec& query, std::size_t k, std::size_t ef) const;

    std::size_t size() const;
    std::size_t shard_count() const { return shards_.size(); }
    std::size_t shard_of(const std::string& agent_id) const;
    const HnswGraph& shard(std::size_t i) const { return shards_[i]; }

    void save_snapshot(const std::string& path) const;
    static ShardedIndex load_snapshot(const std::string& path);

private:
    struct Entry {
        std::size_t shard;
        std::uint64_t version;
    };

    std::size_t dim_;
    HnswParams params_;
    std::uint64_t seed_;
    std::vector<HnswGraph> shards_;
    std::unordered_map<std::string, Entry> id_map_;
};

// Brute-force exact top-k cosine scan; the oracle the index is tested
// against and the reference for the ef_search >= N fallback.
std::vector<SearchHit> brute_force_topk(
    const std::vector<std::pair<std::string, Vec>>& points, const Vec& query, std::size_t k);

}  // namespace foa
