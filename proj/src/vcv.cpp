#include "foa/vcv.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "foa/errors.hpp"

namespace foa {

void Vcv::validate() const {
    if (agent_id.empty()) throw std::invalid_argument("Vcv: empty agent_id");
    if (!is_unit(capability)) throw std::invalid_argument("Vcv: capability not unit-norm");
    if (!is_unit(spec_embedding)) throw std::invalid_argument("Vcv: spec_embedding not unit-norm");
    for (double r : resources) {
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("Vcv: resource entries must be non-negative and finite");
    }
}

std::string SpecDocument::render() const {
    std::ostringstream out;
    out << "agent " << agent_id << "\n";
    out << "goals:";
    for (const auto& g : goals) out << " " << g << ";";
    out << "\nrules:";
    for (const auto& r : rules) out << " " << r << ";";
    out << "\ntools:";
    for (const auto& t : tools) out << " " << t << ";";
    out << "\n";
    return out.str();
}

nlohmann::json to_json(const Vcv& vcv) {
    return nlohmann::json{
        {"agent_id", vcv.agent_id},
        {"c", vcv.capability},
        {"s", vcv.skills.bits().to_base64()},
        {"s_bits", vcv.skills.bit_count()},
        {"s_hashes", vcv.skills.hash_count()},
        {"r", vcv.resources},
        {"p", vcv.policies.to_base64()},
        {"p_bits", vcv.policies.size()},
        {"e", vcv.spec_embedding},
        {"v", vcv.version},
    };
}

Vcv vcv_from_json(const nlohmann::json& j) {
    Vcv vcv;
    vcv.agent_id = j.at("agent_id").get<std::string>();
    vcv.capability = j.at("c").get<Vec>();
    std::size_t s_bits = j.at("s_bits").get<std::size_t>();
    std::size_t s_hashes = j.at("s_hashes").get<std::size_t>();
    vcv.skills = BloomFilter(s_bits, s_hashes);
    vcv.skills.set_bits(Bitset::from_base64(s_bits, j.at("s").get<std::string>()));
    vcv.resources = j.at("r").get<Vec>();
    std::size_t p_bits = j.at("p_bits").get<std::size_t>();
    vcv.policies = Bitset::from_base64(p_bits, j.at("p").get<std::string>());
    vcv.spec_embedding = j.at("e").get<Vec>();
    vcv.version = j.at("v").get<std::uint64_t>();
    return vcv;
}

Vcv bump_version(const Vcv& vcv, const std::function<void(Vcv&)>& mutate) {
    Vcv next = vcv;
    mutate(next);
    next.version = vcv.version;  // the mutation may not tamper with v itself
    if (next == vcv) throw NoChangeError("bump_version: mutation changed nothing");
    next.version = vcv.version + 1;
    next.validate();
    return next;
}

VcvStore::VcvStore(const VcvStore& other) {
    std::lock_guard lock(other.mutex_);
    node_id_ = other.node_id_;
    entries_ = other.entries_;
}

VcvStore& VcvStore::operator=(const VcvStore& other) {
    if (this == &other) return *this;
    auto copy = other.snapshot();
    std::lock_guard lock(mutex_);
    node_id_ = other.node_id_;
    entries_ = std::move(copy);
    return *this;
}

void VcvStore::put(Vcv vcv) {
    vcv.validate();
    std::lock_guard lock(mutex_);
    auto it = entries_.find(vcv.agent_id);
    if (it != entries_.end() && vcv.version < it->second.version)
        throw std::invalid_argument("VcvStore::put: version regression for " + vcv.agent_id);
    entries_.insert_or_assign(vcv.agent_id, std::move(vcv));
}

const Vcv* VcvStore::find(const std::string& agent_id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(agent_id);
    return it == entries_.end() ? nullptr : &it->second;
}

std::size_t VcvStore::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

VersionDigest VcvStore::digest() const {
    std::lock_guard lock(mutex_);
    VersionDigest d;
    for (const auto& [id, vcv] : entries_) d.emplace(id, vcv.version);
    return d;
}

VcvDelta VcvStore::diff(const VersionDigest& remote_digest) const {
    std::lock_guard lock(mutex_);
    VcvDelta delta;
    delta.origin_id = node_id_;
    for (const auto& [id, vcv] : entries_) {
        auto it = remote_digest.find(id);
        if (it == remote_digest.end() || vcv.version > it->second) delta.entries.push_back(vcv);
    }
    return delta;
}

void VcvStore::apply(const VcvDelta& delta) {
    std::set<std::string> seen;
    for (const auto& vcv : delta.entries) {
        if (!seen.insert(vcv.agent_id).second)
            throw ProtocolError("VcvStore::apply: duplicate agent_id in delta: " + vcv.agent_id);
    }
    std::lock_guard lock(mutex_);
    for (const auto& vcv : delta.entries) {
        auto it = entries_.find(vcv.agent_id);
        // Highest version wins; equal versions keep the incumbent.
        if (it == entries_.end() || vcv.version > it->second.version) {
            entries_.insert_or_assign(vcv.agent_id, vcv);
        }
    }
}

std::map<std::string, Vcv> VcvStore::snapshot() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

}  // namespace foa
