#pragma once

#include <string>
#include <vector>

#include "foa/routing.hpp"

namespace foa {

struct ClusterWeights {
    double capability = 0.25;
    double resource = 0.25;
    double draft = 0.25;
    double spec = 0.25;

    void validate() const;  // non-negative, summing to 1
};

struct Cluster {
    std::string cluster_id;
    std::string subtask_id;
    std::vector<std::string> members;  // sorted ascending, 1..max_size
    std::string channel_topic;
};

// Weighted four-component similarity: capability, resource direction,
// draft embedding, spec embedding. Resource vectors are normalized on the
// fly; two zero r-vectors count as similarity 1, one zero as 0. Diagonal
// is 1 by convention.
std::vector<std::vector<double>> similarity_matrix(
    const std::vector<AgentProfile>& agents, const std::vector<std::string>& drafts,
    const ClusterWeights& weights);

// Average-linkage agglomerative clustering. Merging stops when the best
// feasible inter-cluster average similarity drops below `cut` or every
// merge would exceed max_size. Member lists sorted ascending; clusters
// ordered by smallest member.
std::vector<std::vector<std::size_t>> hier_cluster(
    const std::vector<std::vector<double>>& similarity, double cut, std::size_t max_size);

// Partition the agents assigned to a subtask into named clusters with
// transport channel topics.
std::vector<Cluster> form_clusters(const std::string& subtask_id,
                                   const std::vector<AgentProfile>& agents,
                                   const std::vector<std::string>& drafts,
                                   const ClusterWeights& weights, double cut,
                                   std::size_t max_size);

}  // namespace foa
