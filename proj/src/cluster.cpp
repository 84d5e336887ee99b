#include "foa/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "foa/transport.hpp"

namespace foa {

void ClusterWeights::validate() const {
    for (double w : {capability, resource, draft, spec}) {
        if (w < 0.0) throw std::invalid_argument("ClusterWeights: negative weight");
    }
    if (std::abs(capability + resource + draft + spec - 1.0) > 1e-9)
        throw std::invalid_argument("ClusterWeights: weights must sum to 1");
}

namespace {

double resource_cosine(const Vec& a, const Vec& b) {
    double na = norm(a), nb = norm(b);
    if (na == 0.0 && nb == 0.0) return 1.0;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

}  // namespace

std::vector<std::vector<double>> similarity_matrix(
    const std::vector<AgentProfile>& agents, const std::vector<std::string>& drafts,
    const ClusterWeights& weights) {
    weights.validate();
    if (drafts.size() != agents.size())
        throw std::invalid_argument("similarity_matrix: one draft per agent required");
    std::size_t n = agents.size();

    std::vector<Vec> draft_embeddings;
    draft_embeddings.reserve(n);
    for (const auto& d : drafts) {
        if (d.empty()) throw std::invalid_argument("similarity_matrix: missing draft");
        draft_embeddings.push_back(embed_text(d));
    }

    std::vector<std::vector<double>> s(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = weights.capability *
                           cosine(agents[i].vcv.capability, agents[j].vcv.capability) +
                       weights.resource *
                           resource_cosine(agents[i].vcv.resources, agents[j].vcv.resources) +
                       weights.draft * cosine(draft_embeddings[i], draft_embeddings[j]) +
                       weights.spec *
                           cosine(agents[i].vcv.spec_embedding, agents[j].vcv.spec_embedding);
            s[i][j] = s[j][i] = v;
        }
    }
    return s;
}

std::vector<std::vector<std::size_t>> hier_cluster(
    const std::vector<std::vector<double>>& similarity, double cut, std::size_t max_size) {
    std::size_t n = similarity.size();
    if (cut < -1.0 || cut > 1.0) throw std::invalid_argument("hier_cluster: cut out of range");
    if (max_size == 0) throw std::invalid_argument("hier_cluster: max_size must be positive");
    if (n == 0) return {};

    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});

    auto average_link = [&](const std::vector<std::size_t>& a,
                            const std::vector<std::size_t>& b) {
        double sum = 0.0;
        for (std::size_t i : a)
            for (std::size_t j : b) sum += similarity[i][j];
        return sum / static_cast<double>(a.size() * b.size());
    };

    while (clusters.size() > 1) {
        double best = -2.0;
        std::size_t best_a = 0, best_b = 0;
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                if (clusters[a].size() + clusters[b].size() > max_size) continue;
                double link = average_link(clusters[a], clusters[b]);
                // Ties resolved by the smallest member indices so the
                // partition is independent of input order.
                if (link > best ||
                    (link == best &&
                     std::minmax(clusters[a].front(), clusters[b].front()) <
                         std::minmax(clusters[best_a].front(), clusters[best_b].front()))) {
                    best = link;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (best < cut) break;
        auto merged = clusters[best_a];
        merged.insert(merged.end(), clusters[best_b].begin(), clusters[best_b].end());
        std::sort(merged.begin(), merged.end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
        clusters[best_a] = std::move(merged);
    }

    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return clusters;
}

std::vector<Cluster> form_clusters(const std::string& subtask_id,
                                   const std::vector<AgentProfile>& agents,
                                   const std::vector<std::string>& drafts,
                                   const ClusterWeights& weights, double cut,
                                   std::size_t max_size) {
    auto s = similarity_matrix(agents, drafts, weights);

    // Cluster on sorted agent ids so the result is order-independent.
    std::vector<std::size_t> order(agents.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return agents[a].vcv.agent_id < agents[b].vcv.agent_id;
    });
    std::vector<std::vector<double>> sorted_s(agents.size(),
                                              std::vector<double>(agents.size()));
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = 0; j < order.size(); ++j) sorted_s[i][j] = s[order[i]][order[j]];

    auto parts = hier_cluster(sorted_s, cut, max_size);

    std::vector<Cluster> out;
    for (std::size_t c = 0; c < parts.size(); ++c) {
        Cluster cluster;
        cluster.subtask_id = subtask_id;
        cluster.cluster_id = subtask_id + ".c" + std::to_string(c);
        for (std::size_t i : parts[c]) cluster.members.push_back(agents[order[i]].vcv.agent_id);
        std::sort(cluster.members.begin(), cluster.members.end());
        cluster.channel_topic = topic_for(TopicKind::ClusterChannel, cluster.cluster_id);
        out.push_back(std::move(cluster));
    }
    return out;
}

}  // namespace foa
