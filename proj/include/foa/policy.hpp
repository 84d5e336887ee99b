#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "foa/bloom.hpp"
#include "foa/decompose.hpp"
#include "foa/transport.hpp"

namespace foa {

enum class PolicyEventKind {
    BlockedSubmission,
    AgentRefusal,
    GateFail,
};

std::string to_string(PolicyEventKind kind);

struct PolicyEvent {
    std::string event_id;
    PolicyEventKind kind;
    std::string subject;  // task or agent id
    std::string detail;
    std::uint64_t at = 0;  // logical timestamp

    nlohmann::json to_json() const;
};

// Append-only event log with unique ids; single writer (the orchestrator
// supervisor). Optionally mirrors every event onto the enforcement topic.
class PolicyLog {
public:
    explicit PolicyLog(Broker* broker = nullptr) : broker_(broker) {}

    const PolicyEvent& record(PolicyEventKind kind, const std::string& subject,
                              const std::string& detail);
    const std::vector<PolicyEvent>& events() const { return events_; }
    std::size_t count(PolicyEventKind kind) const;

    std::string export_lines() const;  // one JSON record per line

private:
    Broker* broker_;
    std::vector<PolicyEvent> events_;
    std::uint64_t next_id_ = 1;
};

// Blocks the task iff any normalized token of its description hits the
// blocklist. Blocked submissions are logged and never reach decomposition.
// Returns the event when blocked, nullopt when accepted.
std::optional<PolicyEvent> screen_submission(const TaskSpec& task,
                                             const BloomFilter& blocklist, PolicyLog& log);

}  // namespace foa
