#include "scene_analogy/graph.hpp"

#include <cmath>

namespace scene_analogy {

std::optional<std::size_t> SceneGraph::edge_between(std::size_t i, std::size_t j) const {
    if (i >= lookup_.size() || j >= lookup_.size()) return std::nullopt;
    const auto e = lookup_[i][j];
    if (e < 0) return std::nullopt;
    return static_cast<std::size_t>(e);
}

std::size_t SceneGraph::degree(std::size_t i) const {
    std::size_t d = 0;
    for (const auto& e : edges) d += (e.a == i || e.b == i) ? 1 : 0;
    return d;
}

SceneGraph build_graph(const SceneBundle& scene, double edge_threshold) {
    if (!(edge_threshold > 0.0) || !std::isfinite(edge_threshold)) {
        throw ArgumentError("edge threshold must be positive");
    }
    SceneGraph g;
    g.edge_threshold = edge_threshold;
    g.nodes.reserve(scene.objects.size());
    for (const auto& o : scene.objects) g.nodes.push_back({o.id, o.centroid, o.embedding});

    const auto n = g.nodes.size();
    g.lookup_.assign(n, std::vector<std::ptrdiff_t>(n, -1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double len = (g.nodes[i].centroid - g.nodes[j].centroid).norm();
            if (!(len < edge_threshold)) continue;
            const auto idx = static_cast<std::ptrdiff_t>(g.edges.size());
            g.edges.push_back({i, j, len, 0.5 * (g.nodes[i].feature + g.nodes[j].feature)});
            g.lookup_[i][j] = idx;
            g.lookup_[j][i] = idx;
        }
    }
    return g;
}

nlohmann::json graph_to_json(const SceneGraph& graph) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : graph.nodes) {
        nodes.push_back({{"id", n.object_id},
                         {"centroid", {n.centroid.x(), n.centroid.y(), n.centroid.z()}}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : graph.edges) {
        edges.push_back({{"nodes", {e.a, e.b}}, {"length", e.length}});
    }
    return {{"edge_threshold", graph.edge_threshold}, {"nodes", nodes}, {"edges", edges}};
}

}  // namespace scene_analogy
