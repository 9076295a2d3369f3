#include "scene_analogy/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace scene_analogy {

void AffinityConfig::check() const {
    auto in_unit = [](double w) { return w >= 0.0 && w <= 1.0; };
    if (!in_unit(node_weight)) throw ArgumentError("node_weight must lie in [0, 1]");
    if (!in_unit(edge_feature_weight)) throw ArgumentError("edge_feature_weight must lie in [0, 1]");
    if (!(length_sigma > 0.0) || !std::isfinite(length_sigma)) {
        throw ArgumentError("length_sigma must be positive");
    }
    if (!(min_node_affinity >= -1.0 && min_node_affinity <= 1.0)) {
        throw ArgumentError("min_node_affinity must lie in [-1, 1]");
    }
}

double node_affinity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw ArgumentError("embedding sizes differ");
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw ArgumentError("cosine similarity of a zero vector");
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double pairwise_affinity(const GraphEdge& e_tgt, const GraphEdge& e_ref, const AffinityConfig& cfg) {
    const double na = e_tgt.feature.norm();
    const double nb = e_ref.feature.norm();
    // Opposite endpoint features can average to zero; that carries no evidence.
    if (na == 0.0 || nb == 0.0) return 0.0;
    const double cosine = std::clamp(e_tgt.feature.dot(e_ref.feature) / (na * nb), -1.0, 1.0);
    const double gap = e_tgt.length - e_ref.length;
    return cfg.edge_feature_weight * std::max(0.0, cosine) *
           std::exp(-(gap * gap) / (2.0 * cfg.length_sigma * cfg.length_sigma));
}

namespace {

constexpr int kMaxPowerIterations = 200;
constexpr double kPowerTolerance = 1e-9;
constexpr double kGreedyStopRatio = 0.1;

struct Candidate {
    std::size_t tgt;
    std::size_t ref;
    double node_affinity;
};

}  // namespace

MatchSet match_graphs(const SceneGraph& g_tgt, const SceneGraph& g_ref, const AffinityConfig& cfg) {
    cfg.check();
    if (g_tgt.nodes.empty() || g_ref.nodes.empty()) throw ArgumentError("match_graphs needs non-empty graphs");

    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < g_tgt.nodes.size(); ++i) {
        const auto& fi = g_tgt.nodes[i].feature;
        if (fi.norm() == 0.0) continue;
        for (std::size_t j = 0; j < g_ref.nodes.size(); ++j) {
            const auto& fj = g_ref.nodes[j].feature;
            if (fj.norm() == 0.0 || fj.size() != fi.size()) continue;
            const double s = node_affinity(fi, fj);
            if (s >= cfg.min_node_affinity) cands.push_back({i, j, s});
        }
    }
    MatchSet result;
    if (cands.empty()) return result;

    const auto n = static_cast<Eigen::Index>(cands.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const auto& ca = cands[static_cast<std::size_t>(a)];
        m(a, a) = cfg.node_weight * ca.node_affinity;
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const auto& cb = cands[static_cast<std::size_t>(b)];
            if (ca.tgt == cb.tgt || ca.ref == cb.ref) continue;
            const auto et = g_tgt.edge_between(ca.tgt, cb.tgt);
            const auto er = g_ref.edge_between(ca.ref, cb.ref);
            if (!et || !er) continue;
            const double w = pairwise_affinity(g_tgt.edges[*et], g_ref.edges[*er], cfg);
            m(a, b) = w;
            m(b, a) = w;
        }
    }

    // Power iteration runs separately on every connected block of M. A
    // single leading eigenvector would put all its mass on the dominant block
    // and zero out objects in disconnected parts of the scene.
    std::vector<Eigen::Index> block(static_cast<std::size_t>(n), -1);
    Eigen::Index n_blocks = 0;
    for (Eigen::Index seed = 0; seed < n; ++seed) {
        if (block[static_cast<std::size_t>(seed)] >= 0) continue;
        std::vector<Eigen::Index> stack{seed};
        block[static_cast<std::size_t>(seed)] = n_blocks;
        while (!stack.empty()) {
            const auto a = stack.back();
            stack.pop_back();
            for (Eigen::Index b = 0; b < n; ++b) {
                if (m(a, b) != 0.0 && b != a && block[static_cast<std::size_t>(b)] < 0) {
                    block[static_cast<std::size_t>(b)] = n_blocks;
                    stack.push_back(b);
                }
            }
        }
        ++n_blocks;
    }

    Eigen::VectorXd scores = Eigen::VectorXd::Zero(n);
    for (Eigen::Index blk = 0; blk < n_blocks; ++blk) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index a = 0; a < n; ++a) {
            if (block[static_cast<std::size_t>(a)] == blk) members.push_back(a);
        }
        const auto bn = static_cast<Eigen::Index>(members.size());
        Eigen::MatrixXd sub(bn, bn);
        for (Eigen::Index i = 0; i < bn; ++i) {
            for (Eigen::Index j = 0; j < bn; ++j) {
                sub(i, j) = m(members[static_cast<std::size_t>(i)], members[static_cast<std::size_t>(j)]);
            }
        }
        Eigen::VectorXd v = Eigen::VectorXd::Constant(bn, 1.0 / std::sqrt(static_cast<double>(bn)));
        for (int it = 0; it < kMaxPowerIterations; ++it) {
            Eigen::VectorXd w = sub * v;
            const double norm = w.norm();
            if (norm == 0.0 || !std::isfinite(norm)) break;
            w /= norm;
            const double change = (w - v).norm();
            v = std::move(w);
            if (change < kPowerTolerance) break;
        }
        const Eigen::VectorXd sv = sub * v;
        for (Eigen::Index i = 0; i < bn; ++i) scores[members[static_cast<std::size_t>(i)]] = sv[i];
    }

    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double sa = scores[static_cast<Eigen::Index>(a)];
        const double sb = scores[static_cast<Eigen::Index>(b)];
        if (sa != sb) return sa > sb;
        const auto& ta = g_tgt.nodes[cands[a].tgt].object_id;
        const auto& tb = g_tgt.nodes[cands[b].tgt].object_id;
        if (ta != tb) return ta < tb;
        return g_ref.nodes[cands[a].ref].object_id < g_ref.nodes[cands[b].ref].object_id;
    });

    std::vector<bool> used_t(g_tgt.nodes.size(), false);
    std::vector<bool> used_r(g_ref.nodes.size(), false);
    double cutoff = 0.0;
    for (auto idx : order) {
        const double s = scores[static_cast<Eigen::Index>(idx)];
        if (!(s > 0.0) || !std::isfinite(s)) break;
        if (!result.pairs.empty() && s < cutoff) break;
        const auto& c = cands[idx];
        if (used_t[c.tgt] || used_r[c.ref]) continue;
        if (result.pairs.empty()) cutoff = kGreedyStopRatio * s;
        used_t[c.tgt] = true;
        used_r[c.ref] = true;
        result.pairs.push_back({g_tgt.nodes[c.tgt].object_id, g_ref.nodes[c.ref].object_id, s});
    }
    return result;
}

nlohmann::json matches_to_json(const MatchSet& matches) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : matches.pairs) {
        out.push_back({{"target_id", p.target_id}, {"reference_id", p.reference_id}, {"score", p.score}});
    }
    return out;
}

}  // namespace scene_analogy
