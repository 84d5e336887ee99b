#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "foa/bloom.hpp"
#include "foa/embedding.hpp"

#include "json.hpp"

namespace foa {

inline constexpr std::size_t kPolicyBits = 64;
inline constexpr std::size_t kResourceDim = 4;  // latency ms, bandwidth Mbps, memory GB, energy

// Versioned Capability Vector: an agent's searchable profile. Immutable
// once constructed; mutations go through bump_version and yield a new value.
struct Vcv {
    std::string agent_id;
    Vec capability;          // c, unit-norm, dim d
    BloomFilter skills;      // s
    Vec resources;           // r, non-negative finite entries
    Bitset policies;         // p
    Vec spec_embedding;      // e, unit-norm, dim d'
    std::uint64_t version = 0;

    bool operator==(const Vcv&) const = default;

    // Enforces the unit-norm and resource invariants; throws on violation.
    void validate() const;
};

nlohmann::json to_json(const Vcv& vcv);
Vcv vcv_from_json(const nlohmann::json& j);

// Document of an agent's goals, rules and tools; `text` is the canonical
// rendering and is recomputed, never stored independently.
struct SpecDocument {
    std::string agent_id;
    std::vector<std::string> goals;
    std::vector<std::string> rules;
    std::vector<std::string> tools;

    std::string render() const;
};

struct VcvDelta {
    std::string origin_id;
    std::vector<Vcv> entries;  // unique agent_ids, versions above the digest
};

// Applies `mutate` to a copy and returns it with version+1. The mutation
// must change at least one field other than the version (NoChangeError).
Vcv bump_version(const Vcv& vcv, const std::function<void(Vcv&)>& mutate);

using VersionDigest = std::map<std::string, std::uint64_t>;

// A node's local VCV set. apply() is serialized by an internal mutex; the
// merge rule is highest-version-wins, ties keep the incumbent so redelivery
// is idempotent.
class VcvStore {
public:
    explicit VcvStore(std::string node_id = {}) : node_id_(std::move(node_id)) {}
    VcvStore(const VcvStore& other);
    VcvStore& operator=(const VcvStore& other);

    void put(Vcv vcv);  // local ownership path; enforces monotone versions
    const Vcv* find(const std::string& agent_id) const;
    std::size_t size() const;

    VersionDigest digest() const;
    VcvDelta diff(const VersionDigest& remote_digest) const;
    void apply(const VcvDelta& delta);

    std::map<std::string, Vcv> snapshot() const;
    bool operator==(const VcvStore& other) const { return entries_ == other.entries_; }

private:
    std::string node_id_;
    std::map<std::string, Vcv> entries_;
    mutable std::mutex mutex_;
};

}  // namespace foa
