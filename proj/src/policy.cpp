#include "foa/policy.hpp"

#include <sstream>

namespace foa {

std::string to_string(PolicyEventKind kind) {
    switch (kind) {
        case PolicyEventKind::BlockedSubmission: return "BLOCKED_SUBMISSION";
        case PolicyEventKind::AgentRefusal: return "AGENT_REFUSAL";
        case PolicyEventKind::GateFail: return "GATE_FAIL";
    }
    return "UNKNOWN";
}

nlohmann::json PolicyEvent::to_json() const {
    return {{"type", msg::PolicyEvent},
            {"event_id", event_id},
            {"kind", to_string(kind)},
            {"subject", subject},
            {"detail", detail},
            {"at", at}};
}

const PolicyEvent& PolicyLog::record(PolicyEventKind kind, const std::string& subject,
                                     const std::string& detail) {
    PolicyEvent event;
    event.event_id = "pe" + std::to_string(next_id_);
    event.kind = kind;
    event.subject = subject;
    event.detail = detail;
    event.at = next_id_;
    ++next_id_;
    events_.push_back(std::move(event));
    const PolicyEvent& stored = events_.back();
    if (broker_) {
        broker_->publish({.topic = topic_for(TopicKind::PolicyEnforcement),
                          .payload = stored.to_json(),
                          .qos = Qos::AtLeastOnce,
                          .correlation_id = stored.event_id,
                          .sender_id = "orchestrator"});
    }
    return stored;
}

std::size_t PolicyLog::count(PolicyEventKind kind) const {
    std::size_t n = 0;
    for (const auto& e : events_) n += e.kind == kind;
    return n;
}

std::string PolicyLog::export_lines() const {
    std::ostringstream out;
    for (const auto& e : events_) out << e.to_json().dump() << "\n";
    return out.str();
}

std::optional<PolicyEvent> screen_submission(const TaskSpec& task,
                                             const BloomFilter& blocklist, PolicyLog& log) {
    for (const auto& token : tokenize(task.description)) {
        if (blocklist.contains(token)) {
            return log.record(PolicyEventKind::BlockedSubmission, task.task_id,
                              "blocked token: " + token);
        }
    }
    return std::nullopt;
}

}  // namespace foa
