#include "foa/index.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "foa/hashing.hpp"

namespace foa {

ShardedIndex::ShardedIndex(std::size_t dim, std::size_t shards, HnswParams params,
                           std::uint64_t seed)
    : dim_(dim), params_(params), seed_(seed) {
    if (dim == 0) throw std::invalid_argument("ShardedIndex: dim must be positive");
    if (shards == 0) throw std::invalid_argument("ShardedIndex: need at least one shard");
    shards_.reserve(shards);
    for (std::size_t i = 0; i < shards; ++i) shards_.emplace_back(params, seed + i);
}

std::size_t ShardedIndex::shard_of(const std::string& agent_id) const {
    return static_cast<std::size_t>(fnv1a64(agent_id) % shards_.size());
}

bool ShardedIndex::insert(const Vcv& vcv) {
    return insert(vcv.agent_id, vcv.capability, vcv.version);
}

bool ShardedIndex::insert(const std::string& agent_id, const Vec& capability,
                          std::uint64_t version) {
    if (capability.size() != dim_)
        throw std::invalid_argument("ShardedIndex::insert: dimension mismatch");
    if (!is_unit(capability))
        throw std::invalid_argument("ShardedIndex::insert: capability not unit-norm");

    auto it = id_map_.find(agent_id);
    if (it != id_map_.end() && version <= it->second.version) return false;  // stale no-op

    std::size_t s = shard_of(agent_id);
    shards_[s].insert(agent_id, capability);  // supersedes any old entry
    id_map_[agent_id] = {s, version};
    return true;
}

std::vector<SearchHit> ShardedIndex::search(const Vec& query, std::size_t k) const {
    return search(query, k, params_.ef_search);
}

std::vector<SearchHit> ShardedIndex::search(const Vec& query, std::size_t k,
                                            std::size_t ef) const {
    std::vector<SearchHit> merged;
    for (const auto& shard : shards_) {
        auto hits = shard.search(query, k, ef);
        merged.insert(merged.end(), hits.begin(), hits.end());
    }
    std::sort(merged.begin(), merged.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.agent_id < b.agent_id;
    });
    if (merged.size() > k) merged.resize(k);
    return merged;
}

std::size_t ShardedIndex::size() const { return id_map_.size(); }

void ShardedIndex::save_snapshot(const std::string& path) const {
    nlohmann::json j;
    j["dim"] = dim_;
    j["seed"] = seed_;
    j["params"] = {{"M", params_.M},
                   {"ef_construction", params_.ef_construction},
                   {"ef_search", params_.ef_search}};
    j["shards"] = nlohmann::json::array();
    for (const auto& s : shards_) j["shards"].push_back(s.to_json());
    j["id_map"] = nlohmann::json::object();
    for (const auto& [id, e] : id_map_)
        j["id_map"][id] = {{"shard", e.shard}, {"version", e.version}};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("ShardedIndex: cannot write snapshot " + path);
    out << j.dump();
}

ShardedIndex ShardedIndex::load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ShardedIndex: cannot read snapshot " + path);
    nlohmann::json j = nlohmann::json::parse(in);

    HnswParams params;
    params.M = j.at("params").at("M").get<std::size_t>();
    params.ef_construction = j.at("params").at("ef_construction").get<std::size_t>();
    params.ef_search = j.at("params").at("ef_search").get<std::size_t>();

    std::uint64_t seed = j.at("seed").get<std::uint64_t>();
    ShardedIndex idx(j.at("dim").get<std::size_t>(), j.at("shards").size(), params, seed);
    idx.shards_.clear();
    std::size_t i = 0;
    for (const auto& js : j.at("shards"))
        idx.shards_.push_back(HnswGraph::from_json(js, params, seed + i++));
    for (const auto& [id, je] : j.at("id_map").items())
        idx.id_map_[id] = {je.at("shard").get<std::size_t>(),
                           je.at("version").get<std::uint64_t>()};
    return idx;
}

std::vector<SearchHit> brute_force_topk(
    const std::vector<std::pair<std::string, Vec>>& points, const Vec& query, std::size_t k) {
    std::vector<SearchHit> hits;
    hits.reserve(points.size());
    for (const auto& [id, v] : points) hits.push_back({id, dot(query, v)});
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.agent_id < b.agent_id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

}  // namespace foa
