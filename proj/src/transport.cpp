#include "foa/transport.hpp"

#include <algorithm>
#include <stdexcept>

#include "foa/errors.hpp"

namespace foa {

namespace {

std::vector<std::string> split_segments(const std::string& s) {
    std::vector<std::string> segs;
    std::string cur;
    for (char c : s) {
        if (c == '/') {
            segs.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    segs.push_back(cur);
    return segs;
}

void check_id(const std::string& id) {
    if (id.empty()) throw std::invalid_argument("topic_for: empty id");
    if (id.find('/') != std::string::npos || id.find('+') != std::string::npos ||
        id.find('#') != std::string::npos)
        throw std::invalid_argument("topic_for: invalid characters in id: " + id);
}

}  // namespace

std::string topic_for(TopicKind kind, const std::string& id) {
    switch (kind) {
        case TopicKind::Jobs:
            return "foa/orchestrator/jobs";
        case TopicKind::AgentTasks:
            check_id(id);
            return "foa/agents/" + id + "/tasks";
        case TopicKind::ClusterChannel:
            check_id(id);
            return "foa/clusters/" + id + "/channel";
        case TopicKind::CapabilityUpdates:
            return "foa/capabilities/updates";
        case TopicKind::PolicyEnforcement:
            return "foa/policies/enforcement";
        case TopicKind::Meta:
            return "foa/meta";
        case TopicKind::Retain:
            return "foa/retain";
        case TopicKind::Result:
            return "foa/result";
    }
    throw std::invalid_argument("topic_for: unknown kind");
}

bool valid_topic(const std::string& topic) {
    if (topic.empty()) return false;
    for (const auto& seg : split_segments(topic)) {
        if (seg.empty()) return false;
        if (seg.find('+') != std::string::npos || seg.find('#') != std::string::npos)
            return false;
    }
    return true;
}

bool valid_pattern(const std::string& pattern) {
    if (pattern.empty()) return false;
    auto segs = split_segments(pattern);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& seg = segs[i];
        if (seg.empty()) return false;
        if (seg == "#") {
            if (i + 1 != segs.size()) return false;  // '#' must be terminal
            continue;
        }
        if (seg != "+" &&
            (seg.find('+') != std::string::npos || seg.find('#') != std::string::npos))
            return false;  // wildcards only as whole segments
    }
    return true;
}

bool topic_matches(const std::string& pattern, const std::string& topic) {
    auto ps = split_segments(pattern);
    auto ts = split_segments(topic);
    std::size_t i = 0;
    for (; i < ps.size(); ++i) {
        if (ps[i] == "#") return true;
        if (i >= ts.size()) return false;
        if (ps[i] != "+" && ps[i] != ts[i]) return false;
    }
    return i == ts.size();
}

std::string Envelope::type() const {
    if (payload.is_object() && payload.contains("type")) return payload.at("type");
    return {};
}

Broker::Subscription::~Subscription() {
    if (broker_) broker_->unsubscribe_id(id_);
}

void Broker::Subscription::unsubscribe() {
    if (broker_) {
        broker_->unsubscribe_id(id_);
        broker_ = nullptr;
    }
}

std::uint64_t Broker::Subscription::delivery_count() const {
    if (!broker_) return 0;
    std::lock_guard lock(broker_->mutex_);
    for (const auto& s : broker_->subs_)
        if (s->id == id_) return s->deliveries;
    return 0;
}

Broker::SubscriptionPtr Broker::subscribe(const std::string& pattern, Handler handler,
                                          SubscribeOptions opts) {
    if (!valid_pattern(pattern))
        throw std::invalid_argument("Broker::subscribe: invalid pattern: " + pattern);
    std::lock_guard lock(mutex_);
    if (shut_down_) throw Unavailable("Broker::subscribe: broker shut down");
    auto sub = std::make_shared<Sub>();
    sub->id = next_sub_id_++;
    sub->pattern = pattern;
    sub->handler = std::move(handler);
    sub->opts = std::move(opts);
    subs_.push_back(sub);

    // Retained envelopes are replayed immediately to a new matching
    // subscription.
    for (const auto& [topic, env] : retained_) {
        if (topic_matches(pattern, topic)) {
            if (sub->opts.no_local && env.sender_id == sub->opts.subscriber_id) continue;
            ++sub->deliveries;
            ++total_deliveries_;
            delivery_log_.push_back({sub->opts.subscriber_id, env.topic, env.sender_id,
                                     env.type(), env.correlation_id});
            sub->handler(env);
        }
    }
    return SubscriptionPtr(new Subscription(this, sub->id));
}

void Broker::unsubscribe_id(std::uint64_t id) {
    std::lock_guard lock(mutex_);
    for (auto& s : subs_)
        if (s->id == id) s->active = false;
    std::erase_if(subs_, [id](const auto& s) { return s->id == id; });
}

void Broker::publish(Envelope env) {
    std::lock_guard lock(mutex_);
    if (shut_down_) throw Unavailable("Broker::publish: broker shut down");
    if (!valid_topic(env.topic))
        throw std::invalid_argument("Broker::publish: invalid topic: " + env.topic);
    if (env.retained && env.topic != topic_for(TopicKind::Retain) &&
        env.topic != topic_for(TopicKind::Result))
        throw std::invalid_argument(
            "Broker::publish: retained only valid on capability and result topics");

    env.sent_at = ++clock_;
    ++publish_counts_[env.topic];
    if (env.retained) retained_[env.topic] = env;

    queue_.push_back(env);
    if (duplicate_qos1_ && env.qos == Qos::AtLeastOnce) queue_.push_back(std::move(env));
    if (!draining_) flush();
}

void Broker::flush() {
    std::lock_guard lock(mutex_);
    bool outermost = !draining_;
    draining_ = true;
    while (queue_head_ < queue_.size()) {
        Envelope env = queue_[queue_head_++];
        deliver(env);
    }
    if (outermost) {
        draining_ = false;
        queue_.clear();
        queue_head_ = 0;
    }
}

void Broker::deliver(const Envelope& env) {
    // Snapshot so handlers can subscribe/unsubscribe safely mid-delivery.
    auto subs = subs_;
    for (const auto& sub : subs) {
        if (!sub->active) continue;
        if (!topic_matches(sub->pattern, env.topic)) continue;
        if (sub->opts.no_local && env.sender_id == sub->opts.subscriber_id) continue;
        ++sub->deliveries;
        ++total_deliveries_;
        delivery_log_.push_back({sub->opts.subscriber_id, env.topic, env.sender_id,
                                 env.type(), env.correlation_id});
        sub->handler(env);
    }
}

void Broker::shutdown() {
    std::lock_guard lock(mutex_);
    shut_down_ = true;
    for (auto& s : subs_) s->active = false;
}

std::uint64_t Broker::publish_count(const std::string& topic) const {
    std::lock_guard lock(mutex_);
    auto it = publish_counts_.find(topic);
    return it == publish_counts_.end() ? 0 : it->second;
}

std::map<std::string, std::uint64_t> Broker::publish_counts() const {
    std::lock_guard lock(mutex_);
    return publish_counts_;
}

}  // namespace foa
