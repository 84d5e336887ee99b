#pragma once

#include <map>
#include <string>
#include <vector>

#include "foa/cluster.hpp"
#include "foa/transport.hpp"

namespace foa {

struct Draft {
    std::string author_id;
    std::string subtask_id;
    std::size_t round = 0;
    std::string content;
    double confidence = 0.0;   // in [0,1]
    bool complete_vote = false;

    nlohmann::json to_json() const;
    static Draft from_json(const nlohmann::json& j);
};

struct ConsensusResult {
    std::string subtask_id;
    std::string answer;
    double confidence = 0.0;
    std::size_t rounds_used = 0;
    std::vector<std::string> contributors;

    nlohmann::json to_json() const;
    static ConsensusResult from_json(const nlohmann::json& j);
};

using ReputationMap = std::map<std::string, double>;

// Reference UPDATE policy: adopt the peer draft with the highest
// reputation-weighted confidence when it beats the own weighted confidence
// by more than delta; otherwise keep the own content with confidence moved
// halfway toward the weighted mean. Round is incremented either way.
// Throws ProtocolError on a round mismatch among peers.
Draft reference_update(const Draft& own, const std::vector<Draft>& peers,
                       const ReputationMap& weights, double delta = 0.05);

// Strict-majority content wins; otherwise the draft maximizing
// reputation * confidence, ties to the smallest author_id.
Draft select_representative(const std::vector<Draft>& drafts, const ReputationMap& weights);

// A cluster member as seen by the round runner. Calls may throw
// AgentTimeout, which drops the member from the remaining rounds.
class ConsensusMember {
public:
    virtual ~ConsensusMember() = default;
    virtual const std::string& id() const = 0;
    virtual Draft current_draft() = 0;
    virtual Draft update(const Draft& own, const std::vector<Draft>& peers,
                         const ReputationMap& weights) = 0;
};

struct ConsensusConfig {
    std::size_t k_max = 3;
    bool require_unanimous = true;  // majority-stop when false
};

// Barrier-synchronized k-round exchange over the cluster channel. Every
// round each live member broadcasts its current draft (subscriptions are
// no-local, so a round costs |C|*(|C|-1) deliveries), then updates from the
// peers' drafts. Exits early once the completion vote passes at the round
// barrier. ConsensusFailed when every member has been dropped.
ConsensusResult run_rounds(Broker& broker, const Cluster& cluster,
                           const std::vector<ConsensusMember*>& members,
                           const ReputationMap& weights, const ConsensusConfig& config);

}  // namespace foa
