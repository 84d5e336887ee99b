#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "foa/consensus.hpp"
#include "foa/errors.hpp"

using namespace foa;

namespace {

Draft make_draft(const std::string& author, const std::string& content, double confidence,
                 std::size_t round = 0, bool vote = false) {
    return Draft{author, "s0", round, content, confidence, vote};
}

// Scripted member: fixed update trajectory, optional timeout round.
class ScriptMember : public ConsensusMember {
public:
    ScriptMember(std::string id, Draft initial) : id_(std::move(id)), draft_(std::move(initial)) {}

    const std::string& id() const override { return id_; }
    Draft current_draft() override { return draft_; }
    Draft update(const Draft& own, const std::vector<Draft>& peers,
                 const ReputationMap& weights) override {
        ++updates;
        if (timeout_at_round && own.round + 1 >= *timeout_at_round)
            throw AgentTimeout(id_ + " timed out");
        peer_counts.push_back(peers.size());
        draft_ = reference_update(own, peers, weights);
        if (vote_from_round && draft_.round >= *vote_from_round) draft_.complete_vote = true;
        return draft_;
    }

    std::optional<std::size_t> timeout_at_round;
    std::optional<std::size_t> vote_from_round;
    std::size_t updates = 0;
    std::vector<std::size_t> peer_counts;

private:
    std::string id_;
    Draft draft_;
};

struct Fixture {
    Broker broker;
    Cluster cluster{"s0.c0", "s0", {}, "foa/clusters/s0.c0/channel"};
    std::vector<std::unique_ptr<ScriptMember>> owned;
    std::vector<ConsensusMember*> members;
    ReputationMap weights;

    void add(const std::string& id, Draft d, double rep = 1.0) {
        auto m = std::make_unique<ScriptMember>(id, std::move(d));
        cluster.members.push_back(id);
        weights[id] = rep;
        members.push_back(m.get());
        owned.push_back(std::move(m));
    }
};

}  // namespace

TEST_CASE("reference_update adopts a clearly better peer") {
    ReputationMap w{{"a", 1.0}, {"b", 1.0}};
    Draft own = make_draft("a", "own text", 0.4);
    Draft peer = make_draft("b", "peer text", 0.9);
    Draft next = reference_update(own, {peer}, w);
    CHECK(next.content == "peer text");
    CHECK(next.author_id == "a");  // authorship stays local
    CHECK(next.round == 1);
}

TEST_CASE("reference_update keeps own content inside the delta margin") {
    ReputationMap w{{"a", 1.0}, {"b", 1.0}};
    Draft own = make_draft("a", "own text", 0.60);
    Draft peer = make_draft("b", "peer text", 0.64);  // within delta = 0.05
    Draft next = reference_update(own, {peer}, w);
    CHECK(next.content == "own text");
    // Confidence nudges halfway to the weighted mean (0.62).
    CHECK(next.confidence == doctest::Approx(0.61));
    CHECK(next.round == 1);
}

TEST_CASE("reputation weighting decides adoption") {
    ReputationMap w{{"a", 1.0}, {"b", 0.3}};
    Draft own = make_draft("a", "own text", 0.6);
    Draft peer = make_draft("b", "peer text", 0.9);  // weighted 0.27 < 0.6
    CHECK(reference_update(own, {peer}, w).content == "own text");
}

TEST_CASE("round mismatch among peers is a protocol error") {
    ReputationMap w{{"a", 1.0}, {"b", 1.0}};
    Draft own = make_draft("a", "x", 0.5, 2);
    Draft peer = make_draft("b", "y", 0.5, 1);
    CHECK_THROWS_AS(reference_update(own, {peer}, w), ProtocolError);
}

TEST_CASE("select_representative prefers a strict content majority") {
    ReputationMap w{{"a", 0.1}, {"b", 0.1}, {"c", 1.0}};
    std::vector<Draft> drafts{make_draft("a", "common", 0.2), make_draft("b", "common", 0.2),
                              make_draft("c", "rare", 0.99)};
    CHECK(select_representative(drafts, w).content == "common");
}

TEST_CASE("select_representative falls back to rep*confidence, ties to smallest id") {
    ReputationMap w{{"a", 0.5}, {"b", 1.0}, {"c", 1.0}};
    std::vector<Draft> drafts{make_draft("a", "x", 0.8), make_draft("b", "y", 0.4),
                              make_draft("c", "z", 0.4)};
    CHECK(select_representative(drafts, w).author_id == "a");  // 0.4 ties broken by id
}

TEST_CASE("k rounds with no completion vote cost exactly k*C*(C-1) deliveries") {
    for (std::size_t size : {2u, 3u, 4u}) {
        Fixture f;
        for (std::size_t i = 0; i < size; ++i)
            f.add("m" + std::to_string(i),
                  make_draft("m" + std::to_string(i), "text " + std::to_string(i), 0.5));
        auto before = f.broker.total_deliveries();
        auto result = run_rounds(f.broker, f.cluster, f.members, f.weights, {3, true});
        CHECK(result.rounds_used == 3);
        CHECK(f.broker.total_deliveries() - before == 3 * size * (size - 1));
    }
}

TEST_CASE("unanimous vote exits early") {
    Fixture f;
    f.add("a", make_draft("a", "same", 0.8));
    f.add("b", make_draft("b", "same", 0.8));
    f.owned[0]->vote_from_round = 1;
    f.owned[1]->vote_from_round = 1;
    auto result = run_rounds(f.broker, f.cluster, f.members, f.weights, {3, true});
    CHECK(result.rounds_used == 1);
    CHECK(result.answer == "same");
    CHECK(result.contributors == std::vector<std::string>{"a", "b"});
}

TEST_CASE("majority stop accepts two of three votes") {
    Fixture f;
    f.add("a", make_draft("a", "same", 0.8));
    f.add("b", make_draft("b", "same", 0.8));
    f.add("c", make_draft("c", "other", 0.2));
    f.owned[0]->vote_from_round = 1;
    f.owned[1]->vote_from_round = 1;

    auto unanimous = run_rounds(f.broker, f.cluster, f.members, f.weights, {3, true});
    CHECK(unanimous.rounds_used == 3);  // holdout keeps it running

    Fixture g;
    g.add("a", make_draft("a", "same", 0.8));
    g.add("b", make_draft("b", "same", 0.8));
    g.add("c", make_draft("c", "other", 0.2));
    g.owned[0]->vote_from_round = 1;
    g.owned[1]->vote_from_round = 1;
    auto majority = run_rounds(g.broker, g.cluster, g.members, g.weights, {3, false});
    CHECK(majority.rounds_used == 1);
    CHECK(majority.answer == "same");
}

TEST_CASE("a timed out member is dropped and the rest proceed") {
    Fixture f;
    f.add("a", make_draft("a", "alpha", 0.9));
    f.add("b", make_draft("b", "beta", 0.5));
    f.add("c", make_draft("c", "gamma", 0.5));
    f.owned[1]->timeout_at_round = 1;
    auto result = run_rounds(f.broker, f.cluster, f.members, f.weights, {2, true});
    CHECK(result.contributors == std::vector<std::string>{"a", "c"});
    // Survivors see one fewer peer after the drop.
    CHECK(f.owned[0]->peer_counts.back() == 1);
}

TEST_CASE("all members timing out raises ConsensusFailed") {
    Fixture f;
    f.add("a", make_draft("a", "alpha", 0.9));
    f.add("b", make_draft("b", "beta", 0.5));
    f.owned[0]->timeout_at_round = 1;
    f.owned[1]->timeout_at_round = 1;
    CHECK_THROWS_AS(run_rounds(f.broker, f.cluster, f.members, f.weights, {3, true}),
                    ConsensusFailed);
}

TEST_CASE("single member cluster converges without deliveries") {
    Fixture f;
    f.add("solo", make_draft("solo", "only text", 0.7));
    f.owned[0]->vote_from_round = 1;
    auto before = f.broker.total_deliveries();
    auto result = run_rounds(f.broker, f.cluster, f.members, f.weights, {3, true});
    CHECK(result.answer == "only text");
    // Publishes happen but a no-local sole subscriber receives nothing.
    CHECK(f.broker.total_deliveries() == before);
}

TEST_CASE("draft and result json round trips") {
    Draft d = make_draft("a", "content\nwith lines", 0.42, 2, true);
    Draft d2 = Draft::from_json(d.to_json());
    CHECK(d2.author_id == d.author_id);
    CHECK(d2.round == 2);
    CHECK(d2.content == d.content);
    CHECK(d2.confidence == doctest::Approx(d.confidence));
    CHECK(d2.complete_vote);

    ConsensusResult r{"s0", "answer", 0.9, 2, {"a", "b"}};
    ConsensusResult r2 = ConsensusResult::from_json(r.to_json());
    CHECK(r2.subtask_id == r.subtask_id);
    CHECK(r2.answer == r.answer);
    CHECK(r2.rounds_used == 2);
    CHECK(r2.contributors == r.contributors);
}
