#include "scene_analogy/coarse_align.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include <Eigen/Dense>

namespace scene_analogy {

namespace {

constexpr int kUnvisited = -2;
constexpr double kDegenerateSingular = 1e-6;
constexpr double kMinAbsDet = 1e-6;

std::vector<std::size_t> region(std::span<const Eigen::VectorXd> points, std::size_t i, double eps) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < points.size(); ++j) {
        if ((points[j] - points[i]).norm() <= eps) out.push_back(j);
    }
    return out;
}

}  // namespace

std::vector<int> dbscan(std::span<const Eigen::VectorXd> points, double eps, std::size_t min_pts) {
    if (!(eps > 0.0)) throw ArgumentError("dbscan eps must be positive");
    if (min_pts < 1) throw ArgumentError("dbscan min_pts must be at least 1");

    std::vector<int> labels(points.size(), kUnvisited);
    int next = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (labels[i] != kUnvisited) continue;
        const auto seeds = region(points, i, eps);
        if (seeds.size() < min_pts) {
            labels[i] = kNoise;
            continue;
        }
        const int c = next++;
        labels[i] = c;
        std::deque<std::size_t> queue(seeds.begin(), seeds.end());
        while (!queue.empty()) {
            const auto j = queue.front();
            queue.pop_front();
            if (labels[j] == kNoise) labels[j] = c;  // border point
            if (labels[j] != kUnvisited) continue;
            labels[j] = c;
            const auto nj = region(points, j, eps);
            if (nj.size() >= min_pts) queue.insert(queue.end(), nj.begin(), nj.end());
        }
    }
    return labels;
}

namespace {

std::unordered_map<std::string, std::size_t> node_lookup(const SceneGraph& g) {
    std::unordered_map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) out.emplace(g.nodes[i].object_id, i);
    return out;
}

const Vec3& centroid_of(const SceneGraph& g, const std::unordered_map<std::string, std::size_t>& lookup,
                        const std::string& id) {
    auto it = lookup.find(id);
    if (it == lookup.end()) throw ArgumentError("matched object '" + id + "' is not in the graph");
    return g.nodes[it->second].centroid;
}

}  // namespace

std::vector<MatchCluster> cluster_matches(const MatchSet& matches, const SceneGraph& g_tgt,
                                          const SceneGraph& g_ref, double eps, std::size_t min_pts) {
    if (matches.empty()) return {};
    const auto lt = node_lookup(g_tgt);
    const auto lr = node_lookup(g_ref);

    std::vector<Eigen::VectorXd> translations;
    translations.reserve(matches.size());
    for (const auto& m : matches.pairs) {
        translations.emplace_back(centroid_of(g_ref, lr, m.reference_id) - centroid_of(g_tgt, lt, m.target_id));
    }
    const auto labels = dbscan(translations, eps, min_pts);

    int n_dense = 0;
    for (int l : labels) n_dense = std::max(n_dense, l + 1);
    std::vector<MatchCluster> clusters(static_cast<std::size_t>(n_dense));
    for (int c = 0; c < n_dense; ++c) clusters[static_cast<std::size_t>(c)].cluster_id = c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= 0) clusters[static_cast<std::size_t>(labels[i])].members.push_back(matches.pairs[i]);
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kNoise) clusters.push_back({kNoise, {matches.pairs[i]}});
    }
    return clusters;
}

const char* to_string(AffineKind kind) {
    switch (kind) {
        case AffineKind::affine: return "affine";
        case AffineKind::similarity: return "similarity";
        case AffineKind::translation: return "translation";
        case AffineKind::identity: return "identity";
    }
    return "identity";
}

AffineKind affine_kind_from_string(const std::string& s) {
    for (auto k : {AffineKind::affine, AffineKind::similarity, AffineKind::translation, AffineKind::identity}) {
        if (s == to_string(k)) return k;
    }
    throw FormatError("kind", "unknown affine kind '" + s + "'");
}

namespace {

AffineMap translation_fit(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
    AffineMap m;
    m.kind = AffineKind::translation;
    m.b = mean_point(dst) - mean_point(src);
    return m;
}

// Umeyama's closed form for rotation, uniform scale and translation.
std::optional<AffineMap> similarity_fit(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
    const auto n = static_cast<double>(src.size());
    const Vec3 ms = mean_point(src);
    const Vec3 md = mean_point(dst);
    Mat3 cov = Mat3::Zero();
    double var_src = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
        cov += (dst[i] - md) * (src[i] - ms).transpose();
        var_src += (src[i] - ms).squaredNorm();
    }
    cov /= n;
    var_src /= n;
    if (!(var_src > kDegenerateSingular * kDegenerateSingular)) return std::nullopt;

    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vec3 s = Vec3::Ones();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s[2] = -1.0;
    const Mat3 rotation = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    const double scale = svd.singularValues().dot(s) / var_src;

    AffineMap m;
    m.kind = AffineKind::similarity;
    m.A = scale * rotation;
    m.b = md - m.A * ms;
    if (!m.A.allFinite() || !(std::abs(m.A.determinant()) > kMinAbsDet)) return std::nullopt;
    return m;
}

std::optional<AffineMap> full_affine_fit(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
    const auto n = static_cast<Eigen::Index>(src.size());
    const Vec3 ms = mean_point(src);
    Eigen::Matrix<double, 3, Eigen::Dynamic> centered(3, n);
    for (Eigen::Index i = 0; i < n; ++i) centered.col(i) = src[static_cast<std::size_t>(i)] - ms;
    const Eigen::JacobiSVD<Eigen::MatrixXd> spread(centered);
    if (!(spread.singularValues().minCoeff() > kDegenerateSingular)) return std::nullopt;

    // Rows [x^T 1] -> y^T, solved in one least-squares pass.
    Eigen::MatrixXd design(n, 4);
    Eigen::MatrixXd rhs(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        design.row(i) << src[static_cast<std::size_t>(i)].transpose(), 1.0;
        rhs.row(i) = dst[static_cast<std::size_t>(i)].transpose();
    }
    const Eigen::MatrixXd sol = design.colPivHouseholderQr().solve(rhs);
    AffineMap m;
    m.kind = AffineKind::affine;
    m.A = sol.topRows(3).transpose();
    m.b = sol.row(3).transpose();
    if (!m.A.allFinite() || !m.b.allFinite() || !(std::abs(m.A.determinant()) > kMinAbsDet)) return std::nullopt;
    return m;
}

}  // namespace

AffineMap fit_affine(const MatchCluster& cluster, const SceneGraph& g_tgt, const SceneGraph& g_ref) {
    if (cluster.members.empty()) throw ArgumentError("fit_affine needs a non-empty cluster");
    const auto lt = node_lookup(g_tgt);
    const auto lr = node_lookup(g_ref);
    std::vector<Vec3> src, dst;
    for (const auto& m : cluster.members) {
        src.push_back(centroid_of(g_tgt, lt, m.target_id));
        dst.push_back(centroid_of(g_ref, lr, m.reference_id));
    }
    if (src.size() >= 4) {
        if (auto m = full_affine_fit(src, dst)) return *m;
    }
    if (src.size() >= 3) {
        if (auto m = similarity_fit(src, dst)) return *m;
    }
    return translation_fit(src, dst);
}

std::map<std::string, AffineMap> assign_object_maps(const SceneBundle& scene_tgt,
                                                    std::span<const MatchCluster> clusters,
                                                    std::span<const AffineMap> fits,
                                                    const SceneGraph& g_tgt) {
    if (clusters.size() != fits.size()) throw ArgumentError("one fit per cluster is required");
    std::map<std::string, AffineMap> out;
    if (clusters.empty()) {
        for (const auto& o : scene_tgt.objects) out.emplace(o.id, AffineMap::identity());
        return out;
    }

    const auto lt = node_lookup(g_tgt);
    std::unordered_map<std::string, std::size_t> owner;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (const auto& m : clusters[c].members) owner.emplace(m.target_id, c);
    }
    for (const auto& o : scene_tgt.objects) {
        if (auto it = owner.find(o.id); it != owner.end()) {
            out.emplace(o.id, fits[it->second]);
            continue;
        }
        std::size_t best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            for (const auto& m : clusters[c].members) {
                const double d = (centroid_of(g_tgt, lt, m.target_id) - o.centroid).norm();
                if (d < best_dist) {
                    best_dist = d;
                    best = c;
                }
            }
        }
        out.emplace(o.id, fits[best]);
    }
    return out;
}

nlohmann::json affine_to_json(const AffineMap& map) {
    nlohmann::json a = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) a.push_back(map.A(r, c));
    }
    return {{"A", a}, {"b", {map.b.x(), map.b.y(), map.b.z()}}, {"kind", to_string(map.kind)}};
}

AffineMap affine_from_json(const nlohmann::json& j) {
    AffineMap m;
    const auto& a = j.at("A");
    const auto& b = j.at("b");
    if (!a.is_array() || a.size() != 9 || !b.is_array() || b.size() != 3) {
        throw FormatError("affine", "expected A (9 numbers, row-major) and b (3 numbers)");
    }
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m.A(r, c) = a[static_cast<std::size_t>(3 * r + c)].get<double>();
        m.b[r] = b[static_cast<std::size_t>(r)].get<double>();
    }
    m.kind = affine_kind_from_string(j.value("kind", std::string("affine")));
    return m;
}

nlohmann::json clusters_to_json(std::span<const MatchCluster> clusters, std::span<const AffineMap> fits) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        MatchSet members{clusters[c].members};
        nlohmann::json entry = {{"cluster_id", clusters[c].cluster_id}, {"members", matches_to_json(members)}};
        if (c < fits.size()) {
            entry["affine"] = affine_to_json(fits[c]);
            entry["kind"] = to_string(fits[c].kind);
        }
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace scene_analogy
