#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "foa/agents.hpp"
#include "foa/cluster.hpp"
#include "foa/consensus.hpp"
#include "foa/decompose.hpp"
#include "foa/policy.hpp"
#include "foa/routing.hpp"
#include "foa/transport.hpp"

namespace foa {

enum class Phase { Decomposing, Assigning, Executing, Synthesizing, Done, Failed };
enum class NodeState { Pending, Ready, Running, Complete, TimedOut };
enum class SynthMode { Concat, Rebase, Merge };

std::string to_string(Phase phase);
std::string to_string(SynthMode mode);
SynthMode synth_mode_from_string(const std::string& name);

struct OrchestratorConfig {
    DecomposeConfig decomp;
    ClusterWeights cluster_weights;
    double cluster_cut = 0.2;        // FOE_CLUSTER_SIM_THRESHOLD
    std::size_t cluster_max_size = 4;
    std::size_t rounds = 3;          // k refinement rounds
    bool majority_stop = false;      // completion needs unanimity by default
    std::size_t team_cap = 2;        // r_i, agents per subtask
    SynthMode synth_mode = SynthMode::Concat;
    bool audit_gate_fail = false;
    std::uint64_t timeout_ms = 300'000;
    double reputation_beta = 0.2;
};

struct JobState {
    TaskSpec task;
    TaskDag dag;
    AssignmentMatrix assignment;
    Phase phase = Phase::Decomposing;
    std::map<std::string, NodeState> node_status;
    std::map<std::string, ConsensusResult> results;
    std::uint64_t started_at = 0;
};

struct JobReport {
    std::string task_id;
    Phase phase = Phase::Failed;
    std::string final_answer;
    std::string diagnostic;
    std::map<std::string, std::uint64_t> phase_ticks;       // logical durations
    std::map<std::string, std::uint64_t> topic_publishes;   // per topic class
    std::map<std::string, std::size_t> cluster_rounds;      // cluster_id -> rounds used
    std::uint64_t cluster_peer_deliveries = 0;              // DRAFT deliveries to members
    double assignment_objective = 0.0;
    std::optional<double> oracle_objective;                 // when k*n <= 30
    std::vector<std::string> fallback_events;
    std::size_t synth_ops = 0;
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::uint64_t raw_deliveries = 0;

    nlohmann::json to_json() const;
};

// Combines predecessor solutions (ascending subtask_id, pre-sorted by the
// caller) with a node's answer. With no predecessors every mode returns the
// answer unchanged.
std::string synth(const std::vector<std::pair<std::string, std::string>>& predecessors,
                  const std::string& node_answer, SynthMode mode);

// Exponential moving average reputation update, clamped to [0,1].
double update_reputation(double reputation, double outcome_score, double beta = 0.2);

struct SynthOutcome {
    std::string final_answer;
    std::map<std::string, std::string> solutions;
    std::size_t ops = 0;  // one per node plus one per consumed edge
};

// Topological traversal applying synth at every node; multiple sinks are
// combined in ascending subtask_id order.
SynthOutcome synthesize_dag(const TaskDag& dag,
                            const std::map<std::string, std::string>& answers,
                            SynthMode mode);

struct JobRequest {
    std::string task_id;
    std::string description;
    std::vector<std::size_t> policy_bits;
    Vec resource_demand = Vec(kResourceDim, 0.0);
    double outcome_score = 1.0;  // grading stub input for reputation updates
};

// Agent-0: drives the six-phase pipeline over the broker. One job at a
// time per instance; all protocol messages ride the transport topics and
// every QoS-1 consumer path dedups on correlation_id.
class Orchestrator {
public:
    Orchestrator(Broker& broker, Federation& federation, OrchestratorConfig config,
                 BloomFilter blocklist = BloomFilter());

    JobReport run_job(const JobRequest& request);

    // Submits on foa/orchestrator/jobs; run_job wraps this plus the wait.
    void submit(const JobRequest& request);

    PolicyLog& policy_log() { return policy_log_; }
    const OrchestratorConfig& config() const { return config_; }

private:
    struct ActiveJob {
        JobState state;
        JobRequest request;
        JobReport report;
        std::map<std::string, std::map<std::string, Draft>> drafts;  // subtask -> author
        std::map<std::string, std::set<std::string>> tried_agents;   // subtask -> agents
        std::map<std::string, std::size_t> timeout_count;            // subtask
        std::map<std::string, Proposal> proposals;                   // proposer -> proposal
        std::set<std::string> expected_proposers;
        std::deque<std::string> ready_queue;
        std::map<std::string, std::uint64_t> publishes_at_start;
        std::uint64_t deliveries_at_start = 0;
        std::uint64_t phase_started_tick = 0;
        std::size_t cluster_seq = 0;
    };

    void handle_jobs(const Envelope& env);
    void handle_meta(const Envelope& env);
    void handle_channel(const Envelope& env);

    void start_pipeline();
    void decompose_phase();
    void assign_phase();
    void execute_phase();
    void run_node(const std::string& subtask_id, const std::vector<std::string>& assignees);
    void node_timeout(const std::string& subtask_id);
    void complete_node(const std::string& subtask_id, const ConsensusResult& result);
    void synthesize_phase();
    void fail_job(const std::string& diagnostic);
    void enter_phase(Phase phase);
    void finish_report();

    std::vector<std::string> assigned_agents(const std::string& subtask_id) const;
    std::vector<double> score_row(const SubtaskRequirement& req,
                                  const std::vector<AgentProfile>& profiles);

    Broker& broker_;
    Federation& federation_;
    OrchestratorConfig config_;
    BloomFilter blocklist_;
    PolicyLog policy_log_;
    std::set<std::string> seen_;  // correlation dedup
    std::uint64_t ticks_ = 0;
    std::optional<ActiveJob> job_;
    std::vector<Broker::SubscriptionPtr> subs_;
};

}  // namespace foa
