#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scene_analogy/scene.hpp"

namespace scene_analogy {

inline constexpr double kDefaultEdgeThreshold = 1.5;  // meters

struct GraphNode {
    std::string object_id;
    Vec3 centroid;
    Eigen::VectorXd feature;  // the object's embedding, verbatim
};

struct GraphEdge {
    std::size_t a = 0;  // a < b
    std::size_t b = 0;
    double length = 0.0;
    Eigen::VectorXd feature;  // mean of the endpoint features
};

/// Object-centric scene graph: undirected, no self-loops, no duplicate edges.
struct SceneGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;  // sorted by (a, b)
    double edge_threshold = kDefaultEdgeThreshold;

    /// Index into `edges` for the pair (i, j) in either order.
    std::optional<std::size_t> edge_between(std::size_t i, std::size_t j) const;
    std::size_t degree(std::size_t i) const;

private:
    friend SceneGraph build_graph(const SceneBundle&, double);
    std::vector<std::vector<std::ptrdiff_t>> lookup_;  // dense node x node -> edge index or -1
};

/// One node per object in scene order; an edge for each pair of centroids
/// strictly closer than `edge_threshold`.
SceneGraph build_graph(const SceneBundle& scene, double edge_threshold = kDefaultEdgeThreshold);

nlohmann::json graph_to_json(const SceneGraph& graph);

}  // namespace scene_analogy
