#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scene_analogy/graph.hpp"

namespace scene_analogy {

/// Weights of the quadratic-assignment affinity. The two weights are
/// independent multipliers; they need not sum to one.
struct AffinityConfig {
    double node_weight = 1.0;
    double edge_feature_weight = 1.0;
    double length_sigma = 0.5;  // meters
    double min_node_affinity = 0.2;

    void check() const;
};

struct Match {
    std::string target_id;
    std::string reference_id;
    double score = 0.0;
};

/// One-to-one object associations, sorted by non-increasing score.
struct MatchSet {
    std::vector<Match> pairs;

    bool empty() const noexcept { return pairs.empty(); }
    std::size_t size() const noexcept { return pairs.size(); }
};

/// Cosine similarity. Throws ArgumentError if either vector is zero.
double node_affinity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// edge_feature_weight * max(0, cos(features)) * exp(-(len_t - len_r)^2 / (2 sigma^2)).
double pairwise_affinity(const GraphEdge& e_tgt, const GraphEdge& e_ref, const AffinityConfig& cfg);

/// Spectral matching: principal eigenvector of the candidate-pair affinity
/// matrix by power iteration, then greedy one-to-one discretization.
MatchSet match_graphs(const SceneGraph& g_tgt, const SceneGraph& g_ref, const AffinityConfig& cfg = {});

nlohmann::json matches_to_json(const MatchSet& matches);

}  // namespace scene_analogy
