#include "foa/agents.hpp"

#include <algorithm>
#include <sstream>

#include "foa/errors.hpp"
#include "foa/hashing.hpp"

namespace foa {

std::string retrieve_resources(const std::vector<ToolStub>& tools,
                               const std::string& subtask_description) {
    auto tokens = tokenize(subtask_description);
    std::set<std::string> token_set(tokens.begin(), tokens.end());

    // Keys collected across tools, matched on token overlap, emitted in key
    // order.
    std::map<std::string, std::string> matched;
    for (const auto& tool : tools) {
        for (const auto& [key, snippet] : tool.lookup) {
            for (const auto& kt : tokenize(key)) {
                if (token_set.count(kt)) {
                    matched.emplace(key, snippet);
                    break;
                }
            }
        }
    }
    std::string out;
    for (const auto& [key, snippet] : matched) {
        if (!out.empty()) out += " ";
        out += snippet;
    }
    return out;
}

MockAgent::MockAgent(MockAgentConfig config)
    : config_(std::move(config)), vcv_(build_vcv(config_)) {}

AgentProfile MockAgent::profile() const {
    return {vcv_, config_.reputation, config_.capacity};
}

Proposal MockAgent::decompose(const TaskSpec& task) const {
    if (config_.fail_decompose)
        throw AgentTimeout("decompose timeout: " + config_.agent_id);

    const ScriptedProposal* script = nullptr;
    if (auto it = config_.proposals.find(task.task_id); it != config_.proposals.end())
        script = &it->second;
    else if (auto wild = config_.proposals.find("*"); wild != config_.proposals.end())
        script = &wild->second;

    Proposal p;
    p.proposer_id = config_.agent_id;
    if (script) {
        for (const auto& desc : script->subtasks)
            p.subtasks.push_back({desc, embed_text(desc)});
        p.deps = script->deps;
    } else {
        // Generic two-step split sharing the task's tokens, so proposals
        // from different agents merge.
        std::string a = "analyze " + task.description;
        std::string b = "respond " + task.description;
        p.subtasks.push_back({a, embed_text(a)});
        p.subtasks.push_back({b, embed_text(b)});
        p.deps = {{0, 1}};
    }
    p.validate();
    return p;
}

bool MockAgent::refuses(const std::string& description) const {
    return !config_.refuse_pattern.empty() &&
           description.find(config_.refuse_pattern) != std::string::npos;
}

std::optional<Draft> MockAgent::generate_draft(const std::string& subtask_id,
                                               const std::string& description,
                                               const std::string& context) const {
    if (config_.fail_draft) throw AgentTimeout("draft timeout: " + config_.agent_id);
    if (refuses(description)) return std::nullopt;

    std::uint64_t h = fnv1a64(subtask_id, mix64(config_.seed));
    h = fnv1a64(description, h);
    h = fnv1a64(context, h);

    std::ostringstream content;
    content << "[" << config_.agent_id << "/" << subtask_id << "] answer " << std::hex
            << mix64(h);
    if (!context.empty()) content << " ctx(" << context << ")";

    Draft d;
    d.author_id = config_.agent_id;
    d.subtask_id = subtask_id;
    d.round = 0;
    d.content = content.str().substr(0, config_.token_budget);
    d.confidence = static_cast<double>(mix64(h ^ config_.seed) % 10000) / 9999.0;
    d.complete_vote = config_.complete_after_round == 0;
    return d;
}

Draft MockAgent::update(const Draft& own, const std::vector<Draft>& peers,
                        const ReputationMap& weights) {
    if (config_.fail_update_at_round && own.round + 1 >= *config_.fail_update_at_round)
        throw AgentTimeout("update timeout: " + config_.agent_id);
    Draft next = reference_update(own, peers, weights);
    next.complete_vote = next.round >= config_.complete_after_round &&
                         config_.complete_after_round != kNeverComplete;
    next.content = next.content.substr(0, config_.token_budget);
    current_ = next;
    return next;
}

Vcv build_vcv(const MockAgentConfig& config) {
    std::string capability_text;
    for (const auto& g : config.spec.goals) capability_text += g + " ";
    for (const auto& t : config.spec.tools) capability_text += t + " ";
    for (const auto& s : config.skills) capability_text += s + " ";
    if (capability_text.empty()) capability_text = config.agent_id;

    Vcv vcv;
    vcv.agent_id = config.agent_id;
    vcv.capability = embed_text(capability_text);
    vcv.skills = BloomFilter();
    for (const auto& s : config.skills) vcv.skills.insert(s);
    vcv.resources = config.resources;
    vcv.policies = Bitset(kPolicyBits);
    for (std::size_t bit : config.policy_bits) vcv.policies.set(bit);
    vcv.spec_embedding = embed_text(config.spec.render());
    vcv.version = 0;
    vcv.validate();
    return vcv;
}

AgentRuntime::AgentRuntime(Broker& broker, MockAgentConfig config)
    : broker_(broker), agent_(std::move(config)) {
    sub_ = broker_.subscribe(
        topic_for(TopicKind::AgentTasks, agent_.id()),
        [this](const Envelope& env) { handle(env); },
        {.subscriber_id = agent_.id()});
}

void AgentRuntime::handle(const Envelope& env) {
    if (!env.correlation_id.empty() && !seen_.insert(env.correlation_id).second)
        return;  // at-least-once redelivery

    const std::string type = env.type();
    if (type == msg::DecomposeReq) {
        TaskSpec task;
        task.task_id = env.payload.at("task_id").get<std::string>();
        task.description = env.payload.at("description").get<std::string>();
        task.semantic = embed_text(task.description);
        Proposal proposal;
        try {
            proposal = agent_.decompose(task);
        } catch (const AgentTimeout&) {
            return;  // silently dropped; the orchestrator treats it as skipped
        }
        broker_.publish({.topic = topic_for(TopicKind::Meta),
                         .payload = nlohmann::json{{"type", msg::DecomposeProp},
                                                   {"task_id", task.task_id},
                                                   {"proposal", proposal.to_json()}},
                         .qos = Qos::AtLeastOnce,
                         .correlation_id = "dprop/" + task.task_id + "/" + agent_.id(),
                         .sender_id = agent_.id()});
    } else if (type == msg::TaskAssign) {
        std::string subtask_id = env.payload.at("subtask_id").get<std::string>();
        std::string description = env.payload.at("description").get<std::string>();
        if (agent_.refuses(description)) {
            broker_.publish({.topic = topic_for(TopicKind::PolicyEnforcement),
                             .payload = nlohmann::json{{"type", msg::PolicyEvent},
                                                       {"kind", "AGENT_REFUSAL"},
                                                       {"subject", agent_.id()},
                                                       {"detail", "refused " + subtask_id}},
                             .qos = Qos::AtLeastOnce,
                             .correlation_id = "refusal/" + subtask_id + "/" + agent_.id(),
                             .sender_id = agent_.id()});
            return;
        }
        std::string context = retrieve_resources(agent_.config().tools, description);
        std::optional<Draft> draft;
        try {
            draft = agent_.generate_draft(subtask_id, description, context);
        } catch (const AgentTimeout&) {
            return;  // no reply; the orchestrator's timeout path takes over
        }
        if (!draft) return;
        agent_.set_current_draft(*draft);
        broker_.publish({.topic = topic_for(TopicKind::Meta),
                         .payload = draft->to_json(),
                         .qos = Qos::AtLeastOnce,
                         .correlation_id = "draft0/" + subtask_id + "/" + agent_.id(),
                         .sender_id = agent_.id()});
    }
}

Federation::Federation(Broker& broker)
    : broker_(broker), store_("orchestrator"), index_(256) {}

AgentRuntime& Federation::register_agent(MockAgentConfig config) {
    const std::string id = config.agent_id;
    if (runtimes_.count(id))
        throw ConflictError("register_agent: duplicate agent_id " + id);

    auto runtime = std::make_unique<AgentRuntime>(broker_, std::move(config));
    const Vcv& vcv = runtime->agent().vcv();
    store_.put(vcv);
    index_.insert(vcv.agent_id, reduce_dim(vcv.capability), vcv.version);
    reputations_[id] = runtime->agent().config().reputation;

    broker_.publish({.topic = topic_for(TopicKind::CapabilityUpdates),
                     .payload = nlohmann::json{{"type", msg::VcvUpdate}, {"vcv", to_json(vcv)}},
                     .qos = Qos::AtLeastOnce,
                     .correlation_id = "vcv/" + id + "/v0",
                     .sender_id = id});
    broker_.publish({.topic = topic_for(TopicKind::Retain),
                     .payload = nlohmann::json{{"type", msg::VcvUpdate}, {"vcv", to_json(vcv)}},
                     .qos = Qos::AtLeastOnce,
                     .retained = true,
                     .correlation_id = "vcvsnap/" + id + "/v0",
                     .sender_id = id});

    auto [it, _] = runtimes_.emplace(id, std::move(runtime));
    return *it->second;
}

std::vector<AgentProfile> Federation::profiles() const {
    std::vector<AgentProfile> out;
    for (const auto& [id, rt] : runtimes_) {
        AgentProfile p = rt->agent().profile();
        p.reputation = reputations_.at(id);
        out.push_back(std::move(p));
    }
    return out;
}

AgentRuntime* Federation::runtime(const std::string& agent_id) {
    auto it = runtimes_.find(agent_id);
    return it == runtimes_.end() ? nullptr : it->second.get();
}

MockAgent* Federation::agent(const std::string& agent_id) {
    auto* rt = runtime(agent_id);
    return rt ? &rt->agent() : nullptr;
}

void Federation::set_reputation(const std::string& agent_id, double reputation) {
    reputations_.at(agent_id) = reputation;
}

double Federation::reputation(const std::string& agent_id) const {
    return reputations_.at(agent_id);
}

void Federation::absorb(const Vcv& vcv) {
    const Vcv* current = store_.find(vcv.agent_id);
    if (current && current->version >= vcv.version) return;
    store_.put(vcv);
    index_.insert(vcv.agent_id, reduce_dim(vcv.capability), vcv.version);
}

}  // namespace foa
