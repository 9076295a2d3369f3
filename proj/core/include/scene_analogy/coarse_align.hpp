#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scene_analogy/graph.hpp"
#include "scene_analogy/matcher.hpp"

namespace scene_analogy {

inline constexpr int kNoise = -1;

/// Standard DBSCAN. A point is core when at least `min_pts` points (itself
/// included) lie within `eps` (inclusive). Clusters are numbered in the order
/// the input scan first meets one of their core points; a border point joins
/// the first cluster that reaches it. Unreachable points get kNoise.
std::vector<int> dbscan(std::span<const Eigen::VectorXd> points, double eps, std::size_t min_pts);

struct MatchCluster {
    int cluster_id = kNoise;  // kNoise for a noise match promoted to a singleton
    std::vector<Match> members;
};

/// DBSCAN over the translation vectors (reference centroid - target centroid)
/// of the matched pairs. Dense clusters come first in label order, followed by
/// one singleton per noise match, so every match lands in exactly one cluster.
std::vector<MatchCluster> cluster_matches(const MatchSet& matches, const SceneGraph& g_tgt,
                                          const SceneGraph& g_ref, double eps = 0.75,
                                          std::size_t min_pts = 2);

enum class AffineKind { affine, similarity, translation, identity };

const char* to_string(AffineKind kind);
AffineKind affine_kind_from_string(const std::string& s);

struct AffineMap {
    Mat3 A = Mat3::Identity();
    Vec3 b = Vec3::Zero();
    AffineKind kind = AffineKind::identity;

    Vec3 apply(const Vec3& p) const { return A * p + b; }
    static AffineMap identity() { return {}; }
};

/// Least-squares fit from member target centroids to reference centroids,
/// dropping down the ladder affine -> similarity -> translation as the member
/// count or geometry demands. The returned A is always invertible.
AffineMap fit_affine(const MatchCluster& cluster, const SceneGraph& g_tgt, const SceneGraph& g_ref);

/// Every target object gets one map: its own cluster's when matched, else
/// the cluster with the nearest member centroid, else identity.
std::map<std::string, AffineMap> assign_object_maps(const SceneBundle& scene_tgt,
                                                    std::span<const MatchCluster> clusters,
                                                    std::span<const AffineMap> fits,
                                                    const SceneGraph& g_tgt);

nlohmann::json affine_to_json(const AffineMap& map);
AffineMap affine_from_json(const nlohmann::json& j);
nlohmann::json clusters_to_json(std::span<const MatchCluster> clusters, std::span<const AffineMap> fits);

}  // namespace scene_analogy
