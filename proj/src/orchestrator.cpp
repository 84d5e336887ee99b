#include "foa/orchestrator.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "foa/errors.hpp"

namespace foa {

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::Decomposing: return "Decomposing";
        case Phase::Assigning: return "Assigning";
        case Phase::Executing: return "Executing";
        case Phase::Synthesizing: return "Synthesizing";
        case Phase::Done: return "Done";
        case Phase::Failed: return "Failed";
    }
    return "Unknown";
}

std::string to_string(SynthMode mode) {
    switch (mode) {
        case SynthMode::Concat: return "concat";
        case SynthMode::Rebase: return "rebase";
        case SynthMode::Merge: return "merge";
    }
    return "concat";
}

SynthMode synth_mode_from_string(const std::string& name) {
    if (name == "concat") return SynthMode::Concat;
    if (name == "rebase") return SynthMode::Rebase;
    if (name == "merge") return SynthMode::Merge;
    throw std::invalid_argument("unknown synth mode: " + name);
}

nlohmann::json JobReport::to_json() const {
    nlohmann::json j;
    j["task_id"] = task_id;
    j["phase"] = to_string(phase);
    j["final_answer"] = final_answer;
    j["diagnostic"] = diagnostic;
    j["phase_ticks"] = phase_ticks;
    j["topic_publishes"] = topic_publishes;
    j["cluster_rounds"] = cluster_rounds;
    j["cluster_peer_deliveries"] = cluster_peer_deliveries;
    j["assignment_objective"] = assignment_objective;
    if (oracle_objective) j["oracle_objective"] = *oracle_objective;
    j["fallback_events"] = fallback_events;
    j["synth_ops"] = synth_ops;
    j["node_count"] = node_count;
    j["edge_count"] = edge_count;
    j["raw_deliveries"] = raw_deliveries;
    return j;
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out.push_back('\n');
        out += lines[i];
    }
    return out;
}

}  // namespace

std::string synth(const std::vector<std::pair<std::string, std::string>>& predecessors,
                  const std::string& node_answer, SynthMode mode) {
    if (predecessors.empty()) return node_answer;

    switch (mode) {
        case SynthMode::Concat: {
            std::string out;
            for (const auto& [id, text] : predecessors) {
                out += "[from " + id + "]\n" + text + "\n";
            }
            if (!node_answer.empty()) out += "[node]\n" + node_answer;
            else if (!out.empty()) out.pop_back();  // trailing newline
            return out;
        }
        case SynthMode::Rebase: {
            // Node lines win; predecessors contribute only lines the node
            // does not already state.
            auto node_lines = split_lines(node_answer);
            std::set<std::string> node_set(node_lines.begin(), node_lines.end());
            std::vector<std::string> out;
            std::set<std::string> emitted;
            for (const auto& [id, text] : predecessors) {
                for (const auto& line : split_lines(text)) {
                    if (node_set.count(line) || !emitted.insert(line).second) continue;
                    out.push_back(line);
                }
            }
            out.insert(out.end(), node_lines.begin(), node_lines.end());
            return join_lines(out);
        }
        case SynthMode::Merge: {
            // Union of distinct lines, stable order; lines appearing in more
            // than one source are flagged.
            std::vector<std::vector<std::string>> sources;
            for (const auto& [id, text] : predecessors) sources.push_back(split_lines(text));
            if (!node_answer.empty()) sources.push_back(split_lines(node_answer));

            std::map<std::string, std::size_t> source_count;
            for (const auto& src : sources) {
                std::set<std::string> distinct(src.begin(), src.end());
                for (const auto& line : distinct) ++source_count[line];
            }
            std::vector<std::string> out;
            std::set<std::string> emitted;
            for (const auto& src : sources) {
                for (const auto& line : src) {
                    if (!emitted.insert(line).second) continue;
                    out.push_back(source_count[line] > 1 ? "~ " + line : line);
                }
            }
            return join_lines(out);
        }
    }
    return node_answer;
}

double update_reputation(double reputation, double outcome_score, double beta) {
    if (outcome_score < 0.0 || outcome_score > 1.0)
        throw std::invalid_argument("update_reputation: outcome_score outside [0,1]");
    return std::clamp((1.0 - beta) * reputation + beta * outcome_score, 0.0, 1.0);
}

SynthOutcome synthesize_dag(const TaskDag& dag,
                            const std::map<std::string, std::string>& answers,
                            SynthMode mode) {
    auto order = dag.topological_order();
    if (!order) throw std::invalid_argument("synthesize_dag: graph has a cycle");

    SynthOutcome outcome;
    for (const auto& id : *order) {
        auto preds = dag.predecessors(id);
        std::sort(preds.begin(), preds.end());
        std::vector<std::pair<std::string, std::string>> pred_solutions;
        for (const auto& p : preds) pred_solutions.emplace_back(p, outcome.solutions.at(p));
        outcome.ops += 1 + preds.size();
        outcome.solutions[id] = synth(pred_solutions, answers.at(id), mode);
    }

    std::vector<std::string> sinks;
    for (const auto& [id, _] : dag.nodes) {
        if (dag.successors(id).empty()) sinks.push_back(id);
    }
    std::sort(sinks.begin(), sinks.end());
    if (sinks.size() == 1) {
        outcome.final_answer = outcome.solutions.at(sinks.front());
    } else {
        std::vector<std::pair<std::string, std::string>> sink_solutions;
        for (const auto& s : sinks) sink_solutions.emplace_back(s, outcome.solutions.at(s));
        outcome.final_answer = synth(sink_solutions, "", mode);
    }
    return outcome;
}

Orchestrator::Orchestrator(Broker& broker, Federation& federation, OrchestratorConfig config,
                           BloomFilter blocklist)
    : broker_(broker),
      federation_(federation),
      config_(std::move(config)),
      blocklist_(std::move(blocklist)),
      policy_log_(&broker) {
    config_.cluster_weights.validate();
    subs_.push_back(broker_.subscribe(
        topic_for(TopicKind::Jobs), [this](const Envelope& e) { handle_jobs(e); },
        {.subscriber_id = "orchestrator"}));
    subs_.push_back(broker_.subscribe(
        topic_for(TopicKind::Meta), [this](const Envelope& e) { handle_meta(e); },
        {.subscriber_id = "orchestrator"}));
    subs_.push_back(broker_.subscribe(
        "foa/clusters/+/channel", [this](const Envelope& e) { handle_channel(e); },
        {.subscriber_id = "orchestrator"}));
    subs_.push_back(broker_.subscribe(
        topic_for(TopicKind::CapabilityUpdates),
        [this](const Envelope& e) {
            if (e.type() != msg::VcvUpdate) return;
            if (!e.correlation_id.empty() && !seen_.insert("cap/" + e.correlation_id).second)
                return;
            federation_.absorb(vcv_from_json(e.payload.at("vcv")));
        },
        {.subscriber_id = "orchestrator"}));
}

void Orchestrator::submit(const JobRequest& request) {
    nlohmann::json payload{{"type", msg::JobSubmit},
                           {"task_id", request.task_id},
                           {"description", request.description}};
    broker_.publish({.topic = topic_for(TopicKind::Jobs),
                     .payload = payload,
                     .qos = Qos::AtLeastOnce,
                     .correlation_id = "job/" + request.task_id,
                     .sender_id = "client"});
}

JobReport Orchestrator::run_job(const JobRequest& request) {
    ActiveJob job;
    job.request = request;
    job.report.task_id = request.task_id;
    job.publishes_at_start = broker_.publish_counts();
    job.deliveries_at_start = broker_.total_deliveries();
    job.state.started_at = ticks_;
    job.phase_started_tick = ticks_;

    job.state.task.task_id = request.task_id;
    job.state.task.description = request.description;
    job.state.task.semantic = embed_text(request.description);
    job.state.task.required_policies = Bitset(kPolicyBits);
    for (std::size_t bit : request.policy_bits) job.state.task.required_policies.set(bit);
    job.state.task.resource_demand = request.resource_demand;

    job_ = std::move(job);
    submit(request);
    broker_.flush();
    finish_report();
    JobReport report = job_->report;
    job_.reset();
    return report;
}

void Orchestrator::handle_jobs(const Envelope& env) {
    if (env.type() != msg::JobSubmit) return;
    if (!seen_.insert(env.correlation_id).second) return;
    if (!job_ || env.payload.at("task_id") != job_->request.task_id) return;
    ++ticks_;
    start_pipeline();
}

void Orchestrator::start_pipeline() {
    if (auto blocked = screen_submission(job_->state.task, blocklist_, policy_log_)) {
        fail_job("blocked by policy: " + blocked->detail);
        return;
    }
    decompose_phase();
}

void Orchestrator::decompose_phase() {
    enter_phase(Phase::Decomposing);
    auto profiles = federation_.profiles();
    auto candidates = select_candidates(job_->state.task, profiles, config_.decomp.threshold,
                                        config_.decomp.max_agents);
    if (candidates.empty()) {
        fail_job("routing failure: empty federation");
        return;
    }
    for (std::size_t idx : candidates) {
        const std::string& agent_id = profiles[idx].vcv.agent_id;
        job_->expected_proposers.insert(agent_id);
        broker_.publish({.topic = topic_for(TopicKind::AgentTasks, agent_id),
                         .payload = nlohmann::json{{"type", msg::DecomposeReq},
                                                   {"task_id", job_->request.task_id},
                                                   {"description", job_->request.description}},
                         .qos = Qos::AtLeastOnce,
                         .correlation_id = "dreq/" + job_->request.task_id + "/" + agent_id,
                         .sender_id = "orchestrator"});
    }
    broker_.flush();

    std::vector<Proposal> accepted;
    for (const auto& [proposer, proposal] : job_->proposals) {
        if (auto clamped = clamp_proposal(proposal, config_.decomp.subtasks_min,
                                          config_.decomp.subtasks_max))
            accepted.push_back(std::move(*clamped));
    }
    try {
        TaskDag merged = merge_proposals(accepted, config_.decomp.merge_sim, job_->state.task,
                                         config_.team_cap);
        job_->state.dag = validate_dag(std::move(merged));
    } catch (const EmptyDecomposition& e) {
        fail_job(std::string("empty-decomposition: ") + e.what());
        return;
    }
    for (const auto& [id, _] : job_->state.dag.nodes)
        job_->state.node_status[id] = NodeState::Pending;
    job_->report.node_count = job_->state.dag.nodes.size();
    job_->report.edge_count = job_->state.dag.edges.size();
    assign_phase();
}

std::vector<double> Orchestrator::score_row(const SubtaskRequirement& req,
                                            const std::vector<AgentProfile>& profiles) {
    std::vector<double> row;
    row.reserve(profiles.size());
    for (const auto& profile : profiles) {
        if (!policy_gate(req.required_policies, profile.vcv.policies)) {
            if (config_.audit_gate_fail)
                policy_log_.record(PolicyEventKind::GateFail,
                                   req.subtask_id + "/" + profile.vcv.agent_id,
                                   "policy gate zeroed the score");
            row.push_back(0.0);
            continue;
        }
        row.push_back(compatibility_score(req, profile));
    }
    return row;
}

void Orchestrator::assign_phase() {
    enter_phase(Phase::Assigning);
    ++ticks_;
    auto profiles = federation_.profiles();
    std::vector<std::string> subtask_ids, agent_ids;
    std::vector<std::vector<double>> scores;
    std::vector<std::size_t> team_caps, capacities;
    std::vector<double> reputations;
    for (const auto& [id, req] : job_->state.dag.nodes) {
        subtask_ids.push_back(id);
        scores.push_back(score_row(req, profiles));
        team_caps.push_back(req.team_cap);
    }
    for (const auto& p : profiles) {
        agent_ids.push_back(p.vcv.agent_id);
        reputations.push_back(p.reputation);
        capacities.push_back(p.capacity);
    }
    try {
        job_->state.assignment = solve_assignment(scores, reputations, team_caps, capacities,
                                                  subtask_ids, agent_ids);
    } catch (const InfeasibleError& e) {
        fail_job(std::string("infeasible-assignment: ") + e.what());
        return;
    }
    job_->report.assignment_objective = job_->state.assignment.objective;
    if (subtask_ids.size() * agent_ids.size() <= 30) {
        job_->report.oracle_objective = exhaustive_assignment_objective(
            scores, reputations, team_caps, capacities);
    }
    execute_phase();
}

std::vector<std::string> Orchestrator::assigned_agents(const std::string& subtask_id) const {
    std::vector<std::string> subtask_ids;
    for (const auto& [id, _] : job_->state.dag.nodes) subtask_ids.push_back(id);
    auto row_it = std::find(subtask_ids.begin(), subtask_ids.end(), subtask_id);
    std::size_t row = static_cast<std::size_t>(row_it - subtask_ids.begin());

    auto profiles = federation_.profiles();
    std::vector<std::string> out;
    for (std::size_t j : job_->state.assignment.rows.at(row))
        out.push_back(profiles[j].vcv.agent_id);
    return out;
}

void Orchestrator::execute_phase() {
    enter_phase(Phase::Executing);
    for (const auto& [id, _] : job_->state.dag.nodes) {
        if (job_->state.dag.predecessors(id).empty()) {
            job_->state.node_status[id] = NodeState::Ready;
            job_->ready_queue.push_back(id);
        }
    }
    while (!job_->ready_queue.empty() && job_->state.phase == Phase::Executing) {
        std::string id = job_->ready_queue.front();
        job_->ready_queue.pop_front();
        run_node(id, assigned_agents(id));
    }
    if (job_->state.phase != Phase::Executing) return;
    for (const auto& [id, status] : job_->state.node_status) {
        if (status != NodeState::Complete) {
            fail_job("execution stalled at subtask " + id);
            return;
        }
    }
    synthesize_phase();
}

void Orchestrator::run_node(const std::string& subtask_id,
                            const std::vector<std::string>& assignees) {
    ++ticks_;
    const SubtaskRequirement& req = job_->state.dag.nodes.at(subtask_id);
    job_->state.node_status[subtask_id] = NodeState::Running;

    std::vector<std::string> fresh;
    for (const auto& agent_id : assignees) {
        if (job_->tried_agents[subtask_id].insert(agent_id).second) fresh.push_back(agent_id);
    }
    for (const auto& agent_id : fresh) {
        broker_.publish({.topic = topic_for(TopicKind::AgentTasks, agent_id),
                         .payload = nlohmann::json{{"type", msg::TaskAssign},
                                                   {"task_id", job_->request.task_id},
                                                   {"subtask_id", subtask_id},
                                                   {"description", req.description}},
                         .qos = Qos::AtLeastOnce,
                         .correlation_id = "assign/" + subtask_id + "/" + agent_id,
                         .sender_id = "orchestrator"});
    }
    broker_.flush();

    // Phase 2 barrier: agents that produced no draft (timeout or refusal)
    // drop out of this attempt.
    std::vector<std::string> participants;
    for (const auto& agent_id : assignees) {
        if (job_->drafts[subtask_id].count(agent_id)) participants.push_back(agent_id);
    }
    if (participants.empty()) {
        node_timeout(subtask_id);
        return;
    }

    std::vector<AgentProfile> member_profiles;
    std::vector<std::string> member_drafts;
    ReputationMap weights;
    for (const auto& agent_id : participants) {
        AgentProfile p = federation_.agent(agent_id)->profile();
        p.reputation = federation_.reputation(agent_id);
        weights[agent_id] = p.reputation;
        member_profiles.push_back(std::move(p));
        member_drafts.push_back(job_->drafts[subtask_id][agent_id].content);
    }

    auto clusters = form_clusters(subtask_id, member_profiles, member_drafts,
                                  config_.cluster_weights, config_.cluster_cut,
                                  config_.cluster_max_size);

    std::vector<ConsensusResult> results;
    std::vector<std::size_t> result_cluster;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const Cluster& cluster = clusters[c];
        std::vector<ConsensusMember*> members;
        for (const auto& member_id : cluster.members) {
            MockAgent* agent = federation_.agent(member_id);
            agent->set_current_draft(job_->drafts[subtask_id][member_id]);
            members.push_back(agent);
            broker_.publish({.topic = topic_for(TopicKind::AgentTasks, member_id),
                             .payload = nlohmann::json{{"type", msg::Dispatch},
                                                       {"cluster_id", cluster.cluster_id},
                                                       {"subtask_id", subtask_id},
                                                       {"members", cluster.members},
                                                       {"rounds", config_.rounds}},
                             .qos = Qos::AtLeastOnce,
                             .correlation_id = "dispatch/" + cluster.cluster_id + "/" + member_id,
                             .sender_id = "orchestrator"});
        }
        broker_.flush();
        ++ticks_;
        try {
            ConsensusConfig cc{config_.rounds, !config_.majority_stop};
            ConsensusResult r = run_rounds(broker_, cluster, members, weights, cc);
            job_->report.cluster_rounds[cluster.cluster_id] = r.rounds_used;
            results.push_back(std::move(r));
            result_cluster.push_back(c);
        } catch (const ConsensusFailed&) {
            job_->report.fallback_events.push_back("cluster-failed " + cluster.cluster_id);
        }
    }
    if (results.empty()) {
        node_timeout(subtask_id);
        return;
    }

    // Several clusters may answer the same subtask; the most confident one
    // reports, ties to the first cluster id.
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
        if (results[i].confidence > results[best].confidence) best = i;
    }
    const Cluster& reporter = clusters[result_cluster[best]];
    nlohmann::json payload = results[best].to_json();
    payload["type"] = msg::TaskComplete;
    broker_.publish({.topic = reporter.channel_topic,
                     .payload = payload,
                     .qos = Qos::AtLeastOnce,
                     .correlation_id = "complete/" + subtask_id,
                     .sender_id = reporter.members.front()});
    broker_.flush();
}

void Orchestrator::node_timeout(const std::string& subtask_id) {
    std::size_t occurrence = ++job_->timeout_count[subtask_id];

    if (occurrence == 1) {
        // First occurrence: reassign to the next-best eligible unused agents.
        const SubtaskRequirement& req = job_->state.dag.nodes.at(subtask_id);
        auto profiles = federation_.profiles();
        auto row = score_row(req, profiles);
        struct Alt {
            double util;
            std::string id;
        };
        std::vector<Alt> alternatives;
        for (std::size_t j = 0; j < profiles.size(); ++j) {
            const std::string& id = profiles[j].vcv.agent_id;
            if (job_->tried_agents[subtask_id].count(id)) continue;
            double util = row[j] * profiles[j].reputation;
            if (util > 0.0) alternatives.push_back({util, id});
        }
        std::sort(alternatives.begin(), alternatives.end(), [](const Alt& a, const Alt& b) {
            if (a.util != b.util) return a.util > b.util;
            return a.id < b.id;
        });
        if (!alternatives.empty()) {
            if (alternatives.size() > req.team_cap) alternatives.resize(req.team_cap);
            std::vector<std::string> ids;
            for (const auto& a : alternatives) ids.push_back(a.id);
            std::string note = "reassign " + subtask_id + " ->";
            for (const auto& id : ids) note += " " + id;
            job_->report.fallback_events.push_back(note);
            run_node(subtask_id, ids);
            return;
        }
    }

    // Accept the best draft received so far.
    const auto& drafts = job_->drafts[subtask_id];
    const Draft* best = nullptr;
    double best_score = 0.0;
    for (const auto& [author, draft] : drafts) {
        double score = federation_.reputation(author) * draft.confidence;
        if (!best || score > best_score || (score == best_score && author < best->author_id)) {
            best = &draft;
            best_score = score;
        }
    }
    if (!best) {
        job_->state.node_status[subtask_id] = NodeState::TimedOut;
        fail_job("subtask " + subtask_id + " timed out with no drafts");
        return;
    }
    job_->report.fallback_events.push_back("accept-best-draft " + subtask_id + " from " +
                                           best->author_id);
    ConsensusResult result;
    result.subtask_id = subtask_id;
    result.answer = best->content;
    result.confidence = best->confidence;
    result.rounds_used = 0;
    result.contributors = {best->author_id};
    nlohmann::json payload = result.to_json();
    payload["type"] = msg::TaskComplete;
    broker_.publish({.topic = topic_for(TopicKind::ClusterChannel, subtask_id + ".fallback"),
                     .payload = payload,
                     .qos = Qos::AtLeastOnce,
                     .correlation_id = "complete/" + subtask_id,
                     .sender_id = best->author_id});
    broker_.flush();
}

void Orchestrator::handle_meta(const Envelope& env) {
    if (!job_) return;
    if (!env.correlation_id.empty() && !seen_.insert(env.correlation_id).second) return;
    const std::string type = env.type();
    if (type == msg::DecomposeProp) {
        if (env.payload.at("task_id") != job_->request.task_id) return;
        Proposal proposal = Proposal::from_json(env.payload.at("proposal"));
        if (!job_->expected_proposers.count(proposal.proposer_id)) return;
        ++ticks_;
        job_->proposals.emplace(proposal.proposer_id, std::move(proposal));
    } else if (type == msg::Draft) {
        Draft draft = Draft::from_json(env.payload);
        if (!job_->state.dag.nodes.count(draft.subtask_id)) return;
        ++ticks_;
        job_->drafts[draft.subtask_id].emplace(draft.author_id, std::move(draft));
    }
}

void Orchestrator::handle_channel(const Envelope& env) {
    if (!job_) return;
    if (env.type() != msg::TaskComplete) return;  // member DRAFT traffic
    if (!seen_.insert(env.correlation_id).second) return;
    ConsensusResult result = ConsensusResult::from_json(env.payload);
    auto it = job_->state.node_status.find(result.subtask_id);
    if (it == job_->state.node_status.end() || it->second != NodeState::Running) {
        policy_log_.record(PolicyEventKind::GateFail, result.subtask_id,
                           "TASK_COMPLETE for unknown or non-running subtask");
        return;
    }
    ++ticks_;
    complete_node(result.subtask_id, result);
}

void Orchestrator::complete_node(const std::string& subtask_id,
                                 const ConsensusResult& result) {
    job_->state.node_status[subtask_id] = NodeState::Complete;
    job_->state.results[subtask_id] = result;
    for (const auto& succ : job_->state.dag.successors(subtask_id)) {
        if (job_->state.node_status[succ] != NodeState::Pending) continue;
        bool all_done = true;
        for (const auto& pred : job_->state.dag.predecessors(succ)) {
            if (job_->state.node_status[pred] != NodeState::Complete) all_done = false;
        }
        if (all_done) {
            job_->state.node_status[succ] = NodeState::Ready;
            job_->ready_queue.push_back(succ);
        }
    }
}

void Orchestrator::synthesize_phase() {
    enter_phase(Phase::Synthesizing);
    ++ticks_;
    std::map<std::string, std::string> answers;
    for (const auto& [id, result] : job_->state.results) answers[id] = result.answer;
    SynthOutcome outcome = synthesize_dag(job_->state.dag, answers, config_.synth_mode);
    job_->report.synth_ops = outcome.ops;
    job_->report.final_answer = outcome.final_answer;

    broker_.publish({.topic = topic_for(TopicKind::Result),
                     .payload = nlohmann::json{{"type", msg::Result},
                                               {"task_id", job_->request.task_id},
                                               {"answer", outcome.final_answer}},
                     .qos = Qos::AtLeastOnce,
                     .retained = true,
                     .correlation_id = "result/" + job_->request.task_id,
                     .sender_id = "orchestrator"});

    std::set<std::string> contributors;
    for (const auto& [_, result] : job_->state.results)
        for (const auto& c : result.contributors) contributors.insert(c);
    for (const auto& agent_id : contributors) {
        federation_.set_reputation(
            agent_id, update_reputation(federation_.reputation(agent_id),
                                        job_->request.outcome_score, config_.reputation_beta));
    }
    enter_phase(Phase::Done);
}

void Orchestrator::fail_job(const std::string& diagnostic) {
    job_->report.diagnostic = diagnostic;
    job_->ready_queue.clear();
    enter_phase(Phase::Failed);
}

void Orchestrator::enter_phase(Phase phase) {
    job_->report.phase_ticks[to_string(job_->state.phase)] +=
        ticks_ - job_->phase_started_tick;
    job_->phase_started_tick = ticks_;
    job_->state.phase = phase;
    job_->report.phase = phase;
}

void Orchestrator::finish_report() {
    auto counts = broker_.publish_counts();
    for (const auto& [topic, count] : counts) {
        std::uint64_t before = 0;
        if (auto it = job_->publishes_at_start.find(topic); it != job_->publishes_at_start.end())
            before = it->second;
        if (count > before) job_->report.topic_publishes[topic] = count - before;
    }
    job_->report.raw_deliveries = broker_.total_deliveries() - job_->deliveries_at_start;

    std::uint64_t peer = 0;
    const auto& log = broker_.delivery_log();
    for (const auto& rec : log) {
        if (rec.type == msg::Draft && rec.topic.rfind("foa/clusters/", 0) == 0 &&
            rec.subscriber_id != "orchestrator")
            ++peer;
    }
    job_->report.cluster_peer_deliveries = peer;
}

}  // namespace foa
