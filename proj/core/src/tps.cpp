#include "scene_analogy/tps.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>

#include <Eigen/Dense>

#include "scene_analogy/parallel.hpp"

namespace scene_analogy {

namespace {

constexpr double kMergeRadius = 1e-9;
constexpr double kCoplanarSingular = 1e-8;
constexpr double kMaxRelativeResidual = 1e-8;

struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (std::int64_t v : {k.x, k.y, k.z}) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

CellKey cell_of(const Vec3& p) {
    return {static_cast<std::int64_t>(std::floor(p.x() / kMergeRadius)),
            static_cast<std::int64_t>(std::floor(p.y() / kMergeRadius)),
            static_cast<std::int64_t>(std::floor(p.z() / kMergeRadius))};
}

// Groups sources within kMergeRadius of a group's first member, in first-seen order.
std::vector<PointPair> merge_duplicates(std::span<const PointPair> pairs) {
    std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> grid;
    std::vector<Vec3> sums;
    std::vector<std::size_t> counts;
    std::vector<PointPair> groups;
    for (const auto& pr : pairs) {
        const auto key = cell_of(pr.source);
        std::optional<std::size_t> hit;
        for (std::int64_t dx = -1; dx <= 1 && !hit; ++dx) {
            for (std::int64_t dy = -1; dy <= 1 && !hit; ++dy) {
                for (std::int64_t dz = -1; dz <= 1 && !hit; ++dz) {
                    auto it = grid.find({key.x + dx, key.y + dy, key.z + dz});
                    if (it == grid.end()) continue;
                    for (auto g : it->second) {
                        if ((groups[g].source - pr.source).norm() <= kMergeRadius) {
                            hit = g;
                            break;
                        }
                    }
                }
            }
        }
        if (hit) {
            sums[*hit] += pr.target;
            ++counts[*hit];
        } else {
            grid[key].push_back(groups.size());
            groups.push_back(pr);
            sums.push_back(pr.target);
            counts.push_back(1);
        }
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (counts[g] > 1) groups[g].target = sums[g] / static_cast<double>(counts[g]);
    }
    return groups;
}

inline double kernel(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

}  // namespace

ThinPlateSpline ThinPlateSpline::from_affine(const AffineMap& map) {
    ThinPlateSpline s;
    s.kernel_weights.resize(0, 3);
    s.A = map.A;
    s.b = map.b;
    return s;
}

Vec3 ThinPlateSpline::apply(const Vec3& q) const {
    if (!q.allFinite()) throw ArgumentError("spline query must be finite");
    Vec3 out = A * q + b;
    for (std::size_t j = 0; j < control_points.size(); ++j) {
        out += kernel(q, control_points[j]) * kernel_weights.row(static_cast<Eigen::Index>(j)).transpose();
    }
    return out;
}

std::vector<Vec3> ThinPlateSpline::apply(std::span<const Vec3> queries) const {
    std::vector<Vec3> out(queries.size());
    parallel_for(queries.size(), [&](std::size_t i) { out[i] = apply(queries[i]); });
    return out;
}

double ThinPlateSpline::side_condition_residual() const {
    Eigen::RowVector3d sum = Eigen::RowVector3d::Zero();
    Mat3 moments = Mat3::Zero();
    for (std::size_t j = 0; j < control_points.size(); ++j) {
        const Eigen::RowVector3d w = kernel_weights.row(static_cast<Eigen::Index>(j));
        sum += w;
        moments += control_points[j] * w;
    }
    return std::max(sum.cwiseAbs().maxCoeff(), moments.cwiseAbs().maxCoeff());
}

ThinPlateSpline fit_tps(std::span<const PointPair> pairs, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("TPS lambda must be non-negative");
    for (const auto& p : pairs) {
        if (!p.source.allFinite() || !p.target.allFinite()) throw ArgumentError("TPS pairs must be finite");
    }
    const auto merged = merge_duplicates(pairs);
    if (merged.size() < 4) {
        throw DegenerateError("thin-plate spline needs at least 4 distinct source points (got " +
                              std::to_string(merged.size()) + "); fall back to the affine-only map");
    }

    const auto m = static_cast<Eigen::Index>(merged.size());
    Vec3 mean = Vec3::Zero();
    for (const auto& p : merged) mean += p.source;
    mean /= static_cast<double>(m);
    Eigen::Matrix<double, Eigen::Dynamic, 3> centered(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) centered.row(i) = (merged[static_cast<std::size_t>(i)].source - mean).transpose();
    const Eigen::JacobiSVD<Eigen::MatrixXd> spread(centered);
    if (!(spread.singularValues().minCoeff() > kCoplanarSingular)) {
        throw DegenerateError("thin-plate spline sources are coplanar; fall back to the affine-only map");
    }

    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(m + 4, m + 4);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m + 4, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& pi = merged[static_cast<std::size_t>(i)];
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double k = kernel(pi.source, merged[static_cast<std::size_t>(j)].source);
            system(i, j) = k;
            system(j, i) = k;
        }
        system(i, i) = lambda;
        system(i, m) = 1.0;
        system(m, i) = 1.0;
        for (int c = 0; c < 3; ++c) {
            system(i, m + 1 + c) = pi.source[c];
            system(m + 1 + c, i) = pi.source[c];
        }
        rhs.row(i) = pi.target.transpose();
    }

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    const Eigen::MatrixXd sol = lu.solve(rhs);
    const double scale = std::max(1.0, rhs.norm());
    if (!sol.allFinite() || (system * sol - rhs).norm() > kMaxRelativeResidual * scale) {
        throw NumericalError("thin-plate spline system is singular");
    }

    ThinPlateSpline s;
    s.lambda = lambda;
    s.control_points.reserve(merged.size());
    for (const auto& p : merged) s.control_points.push_back(p.source);
    s.kernel_weights = sol.topRows(m);
    s.b = sol.row(m).transpose();
    s.A = sol.block(m + 1, 0, 3, 3).transpose();
    return s;
}

std::vector<std::size_t> uniform_subsample(std::size_t count, std::size_t cap) {
    std::vector<std::size_t> out;
    if (cap == 0 || count <= cap) {
        out.resize(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = i;
        return out;
    }
    out.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i) out.push_back(i * count / cap);
    return out;
}

nlohmann::json tps_to_json(const ThinPlateSpline& spline) {
    nlohmann::json cps = nlohmann::json::array();
    nlohmann::json weights = nlohmann::json::array();
    for (std::size_t j = 0; j < spline.control_points.size(); ++j) {
        const auto& p = spline.control_points[j];
        cps.push_back({p.x(), p.y(), p.z()});
        const auto w = spline.kernel_weights.row(static_cast<Eigen::Index>(j));
        weights.push_back({w(0), w(1), w(2)});
    }
    AffineMap affine{spline.A, spline.b, AffineKind::affine};
    auto affine_json = affine_to_json(affine);
    affine_json.erase("kind");
    return {{"control_points", cps}, {"kernel_weights", weights}, {"affine_part", affine_json},
            {"lambda", spline.lambda}};
}

ThinPlateSpline tps_from_json(const nlohmann::json& j) {
    try {
        ThinPlateSpline s;
        const auto& cps = j.at("control_points");
        const auto& weights = j.at("kernel_weights");
        if (cps.size() != weights.size()) throw FormatError("kernel_weights", "row count differs from control_points");
        s.kernel_weights.resize(static_cast<Eigen::Index>(cps.size()), 3);
        for (std::size_t i = 0; i < cps.size(); ++i) {
            s.control_points.emplace_back(cps[i].at(0).get<double>(), cps[i].at(1).get<double>(),
                                          cps[i].at(2).get<double>());
            for (int c = 0; c < 3; ++c) {
                s.kernel_weights(static_cast<Eigen::Index>(i), c) = weights[i].at(static_cast<std::size_t>(c)).get<double>();
            }
        }
        const auto affine = affine_from_json(j.at("affine_part"));
        s.A = affine.A;
        s.b = affine.b;
        s.lambda = j.at("lambda").get<double>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("spline", e.what());
    }
}

}  // namespace scene_analogy
