#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

namespace foa {

enum class Qos : int {
    AtMostOnce = 0,
    AtLeastOnce = 1,
};

enum class TopicKind {
    Jobs,             // foa/orchestrator/jobs
    AgentTasks,       // foa/agents/{agent_id}/tasks
    ClusterChannel,   // foa/clusters/{cluster_id}/channel
    CapabilityUpdates,  // foa/capabilities/updates
    PolicyEnforcement,  // foa/policies/enforcement
    Meta,             // foa/meta
    Retain,           // foa/retain
    Result,           // foa/result
};

// Bit-exact topic strings for the fixed namespace. Throws on ids containing
// '/' or empty ids.
std::string topic_for(TopicKind kind, const std::string& id = {});

// MQTT-style matching: '+' one segment, '#' terminal multi-segment.
bool topic_matches(const std::string& pattern, const std::string& topic);
bool valid_pattern(const std::string& pattern);
bool valid_topic(const std::string& topic);  // no wildcards, no empty segments

// Payload type tags carried in the JSON "type" field.
namespace msg {
inline constexpr const char* JobSubmit = "JOB_SUBMIT";
inline constexpr const char* VcvUpdate = "VCV_UPDATE";
inline constexpr const char* VcvDelta = "VCV_DELTA";
inline constexpr const char* DecomposeReq = "DECOMPOSE_REQ";
inline constexpr const char* DecomposeProp = "DECOMPOSE_PROP";
inline constexpr const char* TaskAssign = "TASK_ASSIGN";
inline constexpr const char* Draft = "DRAFT";
inline constexpr const char* TaskComplete = "TASK_COMPLETE";
inline constexpr const char* Dispatch = "DISPATCH";
inline constexpr const char* PolicyEvent = "POLICY_EVENT";
inline constexpr const char* Result = "RESULT";
}  // namespace msg

struct Envelope {
    std::string topic;
    nlohmann::json payload;       // JSON record with a "type" tag
    Qos qos = Qos::AtLeastOnce;
    bool retained = false;
    std::string correlation_id;
    std::string sender_id;
    std::uint64_t sent_at = 0;    // logical timestamp, stamped by the broker

    std::string type() const;
};

struct SubscribeOptions {
    std::string subscriber_id;
    bool no_local = false;  // skip envelopes whose sender is this subscriber
};

struct DeliveryRecord {
    std::string subscriber_id;
    std::string topic;
    std::string sender_id;
    std::string type;
    std::string correlation_id;
};

// In-process broker with run-to-completion delivery: publishes enqueue, and
// the queue drains FIFO. Handlers may publish; reentrant publishes are
// appended and processed by the active drain, so handler-driven protocols
// see their messages delivered in order before flush() returns.
class Broker {
public:
    using Handler = std::function<void(const Envelope&)>;

    class Subscription {
    public:
        ~Subscription();
        Subscription(const Subscription&) = delete;
        Subscription& operator=(const Subscription&) = delete;
        std::uint64_t id() const { return id_; }
        std::uint64_t delivery_count() const;
        void unsubscribe();

    private:
        friend class Broker;
        Subscription(Broker* broker, std::uint64_t id) : broker_(broker), id_(id) {}
        Broker* broker_;
        std::uint64_t id_;
    };
    using SubscriptionPtr = std::unique_ptr<Subscription>;

    Broker() = default;

    SubscriptionPtr subscribe(const std::string& pattern, Handler handler,
                              SubscribeOptions opts = {});
    void publish(Envelope env);

    // Drains any pending deliveries; safe to call from inside a handler.
    void flush();

    void shutdown();

    // Test hook: deliver every QoS-1 envelope twice (at-least-once duplicate).
    void set_duplicate_qos1(bool on) { duplicate_qos1_ = on; }

    std::uint64_t publish_count(const std::string& topic) const;
    std::map<std::string, std::uint64_t> publish_counts() const;
    std::uint64_t total_deliveries() const { return total_deliveries_; }
    const std::vector<DeliveryRecord>& delivery_log() const { return delivery_log_; }

private:
    struct Sub {
        std::uint64_t id;
        std::string pattern;
        Handler handler;
        SubscribeOptions opts;
        std::uint64_t deliveries = 0;
        bool active = true;
    };

    void deliver(const Envelope& env);
    void unsubscribe_id(std::uint64_t id);

    mutable std::recursive_mutex mutex_;
    std::vector<std::shared_ptr<Sub>> subs_;
    std::vector<Envelope> queue_;
    std::size_t queue_head_ = 0;
    bool draining_ = false;
    bool shut_down_ = false;
    bool duplicate_qos1_ = false;
    std::uint64_t next_sub_id_ = 1;
    std::uint64_t clock_ = 0;
    std::uint64_t total_deliveries_ = 0;
    std::map<std::string, Envelope> retained_;
    std::map<std::string, std::uint64_t> publish_counts_;
    std::vector<DeliveryRecord> delivery_log_;
};

}  // namespace foa
