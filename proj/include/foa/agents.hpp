#pragma once

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "foa/consensus.hpp"
#include "foa/decompose.hpp"
#include "foa/index.hpp"
#include "foa/policy.hpp"
#include "foa/transport.hpp"
#include "foa/vcv.hpp"

namespace foa {

// Scripted "local resources" an agent can consult while drafting.
struct ToolStub {
    std::string name;
    std::map<std::string, std::string> lookup;  // key -> text snippet
};

struct ScriptedProposal {
    std::vector<std::string> subtasks;
    std::vector<std::pair<std::size_t, std::size_t>> deps;
};

inline constexpr std::size_t kNeverComplete = std::numeric_limits<std::size_t>::max();

struct MockAgentConfig {
    std::string agent_id;
    SpecDocument spec;
    std::vector<std::string> skills;
    Vec resources = Vec(kResourceDim, 1.0);
    std::vector<std::size_t> policy_bits;
    std::uint64_t seed = 0;
    double reputation = 1.0;
    std::size_t capacity = 2;
    std::map<std::string, ScriptedProposal> proposals;  // task_id (or "*") -> script
    std::size_t complete_after_round = 1;  // kNeverComplete disables voting
    std::optional<std::size_t> fail_update_at_round;  // AgentTimeout injection
    bool fail_decompose = false;
    bool fail_draft = false;
    std::string refuse_pattern;   // substring match on subtask descriptions
    std::size_t token_budget = 4096;  // draft content length cap, chars
    std::vector<ToolStub> tools;
};

// Concatenates tool snippets whose keys token-overlap the subtask
// description, in key order.
std::string retrieve_resources(const std::vector<ToolStub>& tools,
                               const std::string& subtask_description);

// Deterministic seeded stand-in for an LLM-backed worker. All behavior is
// a pure function of (config, inputs).
class MockAgent : public ConsensusMember {
public:
    explicit MockAgent(MockAgentConfig config);

    const std::string& id() const override { return config_.agent_id; }
    const MockAgentConfig& config() const { return config_; }
    const Vcv& vcv() const { return vcv_; }
    AgentProfile profile() const;

    // DECOMPOSE: scripted per task, with a generic default split.
    Proposal decompose(const TaskSpec& task) const;

    // GENERATE_ANSWER: templated content keyed by (seed, subtask, context);
    // nullopt when the refusal rule matches.
    std::optional<Draft> generate_draft(const std::string& subtask_id,
                                        const std::string& description,
                                        const std::string& context) const;

    bool refuses(const std::string& description) const;

    // ConsensusMember surface.
    Draft current_draft() override { return current_; }
    void set_current_draft(Draft d) { current_ = std::move(d); }
    Draft update(const Draft& own, const std::vector<Draft>& peers,
                 const ReputationMap& weights) override;

private:
    MockAgentConfig config_;
    Vcv vcv_;
    Draft current_;
};

// Builds the agent's VCV from its spec document and skills. The capability
// text is the goals and tools; the spec embedding covers the whole rendered
// document.
Vcv build_vcv(const MockAgentConfig& config);

// Reactive worker: subscribes to foa/agents/{id}/tasks and answers
// DECOMPOSE_REQ with a proposal on foa/meta and TASK_ASSIGN with a round-0
// draft (or a policy refusal event). Handlers dedup on correlation_id.
class AgentRuntime {
public:
    AgentRuntime(Broker& broker, MockAgentConfig config);

    MockAgent& agent() { return agent_; }
    const std::string& id() const { return agent_.id(); }

private:
    void handle(const Envelope& env);

    Broker& broker_;
    MockAgent agent_;
    std::set<std::string> seen_;
    Broker::SubscriptionPtr sub_;
};

// The registered agent pool shared by orchestrator and tests. Registration
// publishes a VCV_UPDATE plus a retained snapshot and indexes the reduced
// capability embedding.
class Federation {
public:
    explicit Federation(Broker& broker);

    AgentRuntime& register_agent(MockAgentConfig config);  // ConflictError on dup id

    std::vector<AgentProfile> profiles() const;
    AgentRuntime* runtime(const std::string& agent_id);
    MockAgent* agent(const std::string& agent_id);
    void set_reputation(const std::string& agent_id, double reputation);
    double reputation(const std::string& agent_id) const;

    // Applies a VCV heard on the updates topic; stale versions are no-ops.
    void absorb(const Vcv& vcv);

    const VcvStore& store() const { return store_; }
    const ShardedIndex& index() const { return index_; }
    std::size_t size() const { return runtimes_.size(); }

private:
    Broker& broker_;
    VcvStore store_;
    ShardedIndex index_;
    std::map<std::string, std::unique_ptr<AgentRuntime>> runtimes_;
    std::map<std::string, double> reputations_;
};

}  // namespace foa
