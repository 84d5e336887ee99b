#include "foa/consensus.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "foa/errors.hpp"

namespace foa {

nlohmann::json Draft::to_json() const {
    return {{"type", msg::Draft},     {"author_id", author_id},
            {"subtask_id", subtask_id}, {"round", round},
            {"content", content},     {"confidence", confidence},
            {"complete_vote", complete_vote}};
}

Draft Draft::from_json(const nlohmann::json& j) {
    Draft d;
    d.author_id = j.at("author_id").get<std::string>();
    d.subtask_id = j.at("subtask_id").get<std::string>();
    d.round = j.at("round").get<std::size_t>();
    d.content = j.at("content").get<std::string>();
    d.confidence = j.at("confidence").get<double>();
    d.complete_vote = j.at("complete_vote").get<bool>();
    return d;
}

nlohmann::json ConsensusResult::to_json() const {
    return {{"subtask_id", subtask_id},
            {"answer", answer},
            {"confidence", confidence},
            {"rounds_used", rounds_used},
            {"contributors", contributors}};
}

ConsensusResult ConsensusResult::from_json(const nlohmann::json& j) {
    ConsensusResult r;
    r.subtask_id = j.at("subtask_id").get<std::string>();
    r.answer = j.at("answer").get<std::string>();
    r.confidence = j.at("confidence").get<double>();
    r.rounds_used = j.at("rounds_used").get<std::size_t>();
    r.contributors = j.at("contributors").get<std::vector<std::string>>();
    return r;
}

namespace {

double weight_of(const ReputationMap& weights, const std::string& id) {
    auto it = weights.find(id);
    return it == weights.end() ? 1.0 : it->second;
}

}  // namespace

Draft reference_update(const Draft& own, const std::vector<Draft>& peers,
                       const ReputationMap& weights, double delta) {
    for (const auto& p : peers) {
        if (p.round != own.round)
            throw ProtocolError("reference_update: round mismatch from " + p.author_id);
        if (p.subtask_id != own.subtask_id)
            throw ProtocolError("reference_update: subtask mismatch from " + p.author_id);
    }

    Draft next = own;
    next.round = own.round + 1;
    if (peers.empty()) return next;

    double own_w = weight_of(weights, own.author_id) * own.confidence;
    const Draft* best_peer = nullptr;
    double best_w = 0.0;
    double mean = own_w;
    for (const auto& p : peers) {
        double w = weight_of(weights, p.author_id) * p.confidence;
        mean += w;
        if (!best_peer || w > best_w || (w == best_w && p.author_id < best_peer->author_id)) {
            best_peer = &p;
            best_w = w;
        }
    }
    mean /= static_cast<double>(peers.size() + 1);

    if (best_w > own_w + delta) {
        next.content = best_peer->content;
        next.confidence = best_peer->confidence;
    } else {
        next.confidence = std::clamp((own.confidence + mean) / 2.0, 0.0, 1.0);
    }
    return next;
}

Draft select_representative(const std::vector<Draft>& drafts, const ReputationMap& weights) {
    if (drafts.empty())
        throw std::invalid_argument("select_representative: empty draft set");

    // Strict majority on content.
    std::map<std::string, std::size_t> tally;
    for (const auto& d : drafts) ++tally[d.content];
    for (const auto& [content, count] : tally) {
        if (2 * count > drafts.size()) {
            const Draft* pick = nullptr;
            for (const auto& d : drafts) {
                if (d.content == content && (!pick || d.author_id < pick->author_id)) pick = &d;
            }
            return *pick;
        }
    }

    const Draft* best = nullptr;
    double best_score = 0.0;
    for (const auto& d : drafts) {
        double score = weight_of(weights, d.author_id) * d.confidence;
        if (!best || score > best_score ||
            (score == best_score && d.author_id < best->author_id)) {
            best = &d;
            best_score = score;
        }
    }
    return *best;
}

ConsensusResult run_rounds(Broker& broker, const Cluster& cluster,
                           const std::vector<ConsensusMember*>& members,
                           const ReputationMap& weights, const ConsensusConfig& config) {
    if (members.empty())
        throw std::invalid_argument("run_rounds: empty cluster");

    struct Slot {
        ConsensusMember* member;
        Draft current;
        std::vector<Draft> inbox;
        std::set<std::string> seen;  // correlation dedup for redelivery
        Broker::SubscriptionPtr sub;
        bool live = true;
    };
    std::vector<Slot> slots;
    slots.reserve(members.size());
    for (auto* m : members) slots.push_back({m, m->current_draft(), {}, {}, nullptr, true});
    std::sort(slots.begin(), slots.end(),
              [](const Slot& a, const Slot& b) { return a.member->id() < b.member->id(); });

    for (auto& slot : slots) {
        Slot* self = &slot;
        slot.sub = broker.subscribe(
            cluster.channel_topic,
            [self](const Envelope& env) {
                if (env.type() != msg::Draft) return;
                if (!self->seen.insert(env.correlation_id).second) return;
                self->inbox.push_back(Draft::from_json(env.payload));
            },
            {.subscriber_id = slot.member->id(), .no_local = true});
    }

    auto live_count = [&] {
        std::size_t n = 0;
        for (const auto& s : slots) n += s.live;
        return n;
    };

    std::size_t rounds_used = 0;
    for (std::size_t r = 1; r <= config.k_max; ++r) {
        // Broadcast barrier: every live member publishes its current draft.
        for (auto& slot : slots) {
            if (!slot.live) continue;
            broker.publish({.topic = cluster.channel_topic,
                            .payload = slot.current.to_json(),
                            .qos = Qos::AtLeastOnce,
                            .correlation_id = cluster.cluster_id + "/" + slot.member->id() +
                                              "/r" + std::to_string(slot.current.round),
                            .sender_id = slot.member->id()});
        }
        broker.flush();

        // Update barrier: every live member folds in the peers' drafts.
        for (auto& slot : slots) {
            if (!slot.live) continue;
            std::vector<Draft> peers;
            for (const auto& d : slot.inbox) {
                if (d.round == slot.current.round) {
                    bool author_live = false;
                    for (const auto& s : slots)
                        if (s.live && s.member->id() == d.author_id) author_live = true;
                    if (author_live) peers.push_back(d);
                }
            }
            try {
                slot.current = slot.member->update(slot.current, peers, weights);
            } catch (const AgentTimeout&) {
                slot.live = false;  // dropped from the remaining rounds
            }
        }
        rounds_used = r;
        if (live_count() == 0)
            throw ConsensusFailed("run_rounds: every member of " + cluster.cluster_id +
                                  " timed out");

        std::size_t votes = 0;
        for (const auto& slot : slots)
            if (slot.live && slot.current.complete_vote) ++votes;
        bool done = config.require_unanimous ? votes == live_count()
                                             : 2 * votes > live_count();
        if (done) break;
    }

    std::vector<Draft> finals;
    ReputationMap final_weights = weights;
    std::vector<std::string> contributors;
    for (auto& slot : slots) {
        if (!slot.live) continue;
        finals.push_back(slot.current);
        contributors.push_back(slot.member->id());
    }
    for (auto& slot : slots) slot.sub.reset();  // leave the channel before reporting

    Draft rep = select_representative(finals, final_weights);
    ConsensusResult result;
    result.subtask_id = cluster.subtask_id;
    result.answer = rep.content;
    result.confidence = rep.confidence;
    result.rounds_used = rounds_used;
    result.contributors = contributors;
    return result;
}

}  // namespace foa
