#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "foa/errors.hpp"
#include "foa/transport.hpp"

using namespace foa;

namespace {

// Independent segment matcher written against the MQTT wildcard rules,
// sharing no code with topic_matches.
bool oracle_matches(const std::string& pattern, const std::string& topic) {
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string seg;
        while (std::getline(ss, seg, '/')) out.push_back(seg);
        if (!s.empty() && s.back() == '/') out.push_back("");
        return out;
    };
    auto p = split(pattern), t = split(topic);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == "#") return i + 1 == p.size();
        if (i >= t.size()) return false;
        if (p[i] != "+" && p[i] != t[i]) return false;
    }
    return p.size() == t.size();
}

Envelope make_env(const std::string& topic, const std::string& type,
                  const std::string& corr, const std::string& sender = "tester") {
    Envelope env;
    env.topic = topic;
    env.payload = nlohmann::json{{"type", type}};
    env.correlation_id = corr;
    env.sender_id = sender;
    return env;
}

}  // namespace

TEST_CASE("topic_for produces the fixed namespace") {
    CHECK(topic_for(TopicKind::Jobs) == "foa/orchestrator/jobs");
    CHECK(topic_for(TopicKind::AgentTasks, "a7") == "foa/agents/a7/tasks");
    CHECK(topic_for(TopicKind::ClusterChannel, "t.s0.c1") == "foa/clusters/t.s0.c1/channel");
    CHECK(topic_for(TopicKind::CapabilityUpdates) == "foa/capabilities/updates");
    CHECK(topic_for(TopicKind::PolicyEnforcement) == "foa/policies/enforcement");
    CHECK(topic_for(TopicKind::Meta) == "foa/meta");
    CHECK(topic_for(TopicKind::Retain) == "foa/retain");
    CHECK(topic_for(TopicKind::Result) == "foa/result");
}

TEST_CASE("wildcard matching agrees with the oracle on randomized pairs") {
    std::mt19937_64 rng(606);
    std::vector<std::string> segs{"foa", "agents", "a1", "tasks", "clusters", "channel",
                                  "x", "+", "#"};
    std::size_t disagreements = 0, checked = 0;
    for (int iter = 0; iter < 1500; ++iter) {
        auto build = [&](bool wildcards) {
            std::string s;
            std::size_t n = 1 + rng() % 4;
            for (std::size_t i = 0; i < n; ++i) {
                std::string seg = segs[rng() % (wildcards ? segs.size() : 7)];
                if (seg == "#" && i + 1 < n) seg = "x";  // keep '#' terminal
                s += (i ? "/" : "") + seg;
            }
            return s;
        };
        std::string pattern = build(true), topic = build(false);
        if (!valid_pattern(pattern) || !valid_topic(topic)) continue;
        ++checked;
        if (topic_matches(pattern, topic) != oracle_matches(pattern, topic)) ++disagreements;
    }
    CHECK(checked > 1000);
    CHECK(disagreements == 0);
}

TEST_CASE("explicit wildcard cases") {
    CHECK(topic_matches("foa/agents/+/tasks", "foa/agents/bob/tasks"));
    CHECK_FALSE(topic_matches("foa/agents/+/tasks", "foa/agents/bob/extra/tasks"));
    CHECK(topic_matches("foa/#", "foa/clusters/c1/channel"));
    CHECK(topic_matches("#", "anything/at/all"));
    CHECK_FALSE(topic_matches("foa/+", "foa/a/b"));
    CHECK_FALSE(valid_pattern("foa/#/tail"));
    CHECK_FALSE(valid_topic("foa/+/literal"));
    CHECK_FALSE(valid_topic(""));
}

TEST_CASE("delivery is FIFO run-to-completion even for reentrant publishes") {
    Broker broker;
    std::vector<std::string> seen;
    auto sub = broker.subscribe("log/#", [&](const Envelope& e) {
        seen.push_back(e.topic);
        if (e.topic == "log/first")
            broker.publish(make_env("log/nested", "X", "c-nested"));
    });
    broker.publish(make_env("log/first", "X", "c1"));
    broker.publish(make_env("log/second", "X", "c2"));
    broker.flush();
    CHECK(seen == std::vector<std::string>{"log/first", "log/nested", "log/second"});
}

TEST_CASE("no cross talk between disjoint topics") {
    Broker broker;
    int a_hits = 0, b_hits = 0;
    auto sa = broker.subscribe("room/a", [&](const Envelope&) { ++a_hits; });
    auto sb = broker.subscribe("room/b", [&](const Envelope&) { ++b_hits; });
    broker.publish(make_env("room/a", "X", "c1"));
    broker.publish(make_env("room/a", "X", "c2"));
    broker.publish(make_env("room/b", "X", "c3"));
    broker.flush();
    CHECK(a_hits == 2);
    CHECK(b_hits == 1);
}

TEST_CASE("retained messages replay to late subscribers") {
    Broker broker;
    auto env = make_env("foa/retain", "VCV_UPDATE", "c-retained");
    env.retained = true;
    broker.publish(env);
    broker.flush();

    int hits = 0;
    auto sub = broker.subscribe("foa/retain", [&](const Envelope& e) {
        ++hits;
        CHECK(e.retained);
    });
    broker.flush();
    CHECK(hits == 1);
}

TEST_CASE("retained flag is only honored on the retain and result topics") {
    Broker broker;
    auto env = make_env("foa/meta", "DRAFT", "c1");
    env.retained = true;
    CHECK_THROWS_AS(broker.publish(env), std::invalid_argument);

    auto ok = make_env("foa/result", "RESULT", "c2");
    ok.retained = true;
    CHECK_NOTHROW(broker.publish(ok));
}

TEST_CASE("a newer retained message replaces the older one per topic") {
    Broker broker;
    auto first = make_env("foa/result", "RESULT", "c1");
    first.retained = true;
    first.payload["n"] = 1;
    auto second = first;
    second.correlation_id = "c2";
    second.payload["n"] = 2;
    broker.publish(first);
    broker.publish(second);
    broker.flush();

    std::vector<int> seen;
    auto sub = broker.subscribe("foa/result",
                                [&](const Envelope& e) { seen.push_back(e.payload["n"]); });
    broker.flush();
    CHECK(seen == std::vector<int>{2});
}

TEST_CASE("no_local suppresses self deliveries including retained replay") {
    Broker broker;
    int hits = 0;
    auto sub = broker.subscribe("ch/x", [&](const Envelope&) { ++hits; },
                                {.subscriber_id = "me", .no_local = true});
    broker.publish(make_env("ch/x", "X", "c1", "me"));
    broker.publish(make_env("ch/x", "X", "c2", "other"));
    broker.flush();
    CHECK(hits == 1);
}

TEST_CASE("unsubscribe stops delivery") {
    Broker broker;
    int hits = 0;
    auto sub = broker.subscribe("u/x", [&](const Envelope&) { ++hits; });
    broker.publish(make_env("u/x", "X", "c1"));
    broker.flush();
    sub.reset();
    broker.publish(make_env("u/x", "X", "c2"));
    broker.flush();
    CHECK(hits == 1);
}

TEST_CASE("publish validates topics and stamps logical timestamps") {
    Broker broker;
    CHECK_THROWS_AS(broker.publish(make_env("bad/+/topic", "X", "c")), std::invalid_argument);
    std::vector<std::uint64_t> stamps;
    auto sub = broker.subscribe("t/#", [&](const Envelope& e) { stamps.push_back(e.sent_at); });
    broker.publish(make_env("t/1", "X", "c1"));
    broker.publish(make_env("t/2", "X", "c2"));
    broker.flush();
    REQUIRE(stamps.size() == 2);
    CHECK(stamps[0] < stamps[1]);
}

TEST_CASE("duplicate qos1 injection doubles raw deliveries only for qos1") {
    Broker broker;
    int hits = 0;
    auto sub = broker.subscribe("d/x", [&](const Envelope&) { ++hits; });
    broker.set_duplicate_qos1(true);
    auto env = make_env("d/x", "X", "c1");
    env.qos = Qos::AtLeastOnce;
    broker.publish(env);
    auto once = make_env("d/x", "X", "c2");
    once.qos = Qos::AtMostOnce;
    broker.publish(once);
    broker.flush();
    CHECK(hits == 3);
}

TEST_CASE("delivery log and publish counts track per topic") {
    Broker broker;
    auto sub = broker.subscribe("foa/meta", [](const Envelope&) {},
                                {.subscriber_id = "watcher"});
    broker.publish(make_env("foa/meta", "DRAFT", "c1", "a1"));
    broker.flush();
    CHECK(broker.publish_counts().at("foa/meta") == 1);
    REQUIRE(broker.delivery_log().size() == 1);
    const auto& rec = broker.delivery_log().front();
    CHECK(rec.subscriber_id == "watcher");
    CHECK(rec.topic == "foa/meta");
    CHECK(rec.type == "DRAFT");
    CHECK(rec.sender_id == "a1");
}

TEST_CASE("shutdown deactivates subscriptions and rejects further publishes") {
    Broker broker;
    int hits = 0;
    auto sub = broker.subscribe("s/x", [&](const Envelope&) { ++hits; });
    broker.publish(make_env("s/x", "X", "c1"));
    broker.shutdown();
    CHECK_THROWS_AS(broker.publish(make_env("s/x", "X", "c2")), Unavailable);
    CHECK_THROWS_AS(broker.subscribe("s/y", [](const Envelope&) {}), Unavailable);
    CHECK(hits == 1);
}
