#include "scene_analogy/fine_align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scene_analogy/parallel.hpp"

namespace scene_analogy {

void OptimConfig::check() const {
    for (double v : {sample_spacing, search_radius, grid_step, descent_step0, fd_epsilon}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError("optimizer lengths must be positive");
    }
    if (descent_iters < 1) throw ArgumentError("descent_iters must be positive");
    if (grid_step > search_radius) throw ArgumentError("grid_step must not exceed search_radius");
}

double DisplacementSolution::total_cost_before() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.cost_before;
    return s;
}

double DisplacementSolution::total_cost_after() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.cost_after;
    return s;
}

double DisplacementSolution::mean_delta_norm() const {
    if (entries.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : entries) s += e.delta.norm();
    return s / static_cast<double>(entries.size());
}

double fine_cost(const DisplacementSolution& solution, const FeatureField& field_tgt,
                 const FeatureField& field_ref) {
    double total = 0.0;
    for (const auto& e : solution.entries) total += residual(field_tgt, field_ref, e.point, e.mapped());
    return total;
}

std::vector<double> search_offsets(double radius, double step) {
    const auto n = static_cast<int>(std::floor(radius / step + 1e-9));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(2 * n + 1));
    for (int i = -n; i <= n; ++i) out.push_back(std::clamp(i * step, -radius, radius));
    return out;
}

namespace {

class PointObjective {
public:
    PointObjective(const FeatureField& field_ref, Eigen::VectorXd target_feature, Vec3 base)
        : field_ref_(field_ref), target_(std::move(target_feature)), base_(std::move(base)),
          scratch_(target_.size()) {}

    double operator()(const Vec3& delta) {
        field_ref_.query_into(base_ + delta, scratch_);
        return (target_ - scratch_).norm();
    }

private:
    const FeatureField& field_ref_;
    Eigen::VectorXd target_;
    Vec3 base_;
    Eigen::VectorXd scratch_;
};

void optimize_point(DisplacementEntry& entry, const FeatureField& field_tgt, const FeatureField& field_ref,
                    const OptimConfig& cfg, const std::vector<double>& offsets) {
    PointObjective cost(field_ref, field_tgt.query(entry.point), entry.coarse_target);
    const double r = cfg.search_radius;

    Vec3 best = Vec3::Zero();
    double best_cost = std::numeric_limits<double>::infinity();
    for (double dx : offsets) {
        for (double dy : offsets) {
            for (double dz : offsets) {
                const Vec3 d(dx, dy, dz);
                const double c = cost(d);
                if (dx == 0.0 && dy == 0.0 && dz == 0.0) entry.cost_before = c;
                if (c < best_cost) {
                    best_cost = c;
                    best = d;
                }
            }
        }
    }

    for (int it = 0; it < cfg.descent_iters; ++it) {
        const double step = cfg.descent_step0 * std::pow(0.5, it / 5);
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 probe = best;
            probe[axis] += cfg.fd_epsilon;
            const double up = cost(probe);
            probe[axis] = best[axis] - cfg.fd_epsilon;
            const double down = cost(probe);
            const double slope = up - down;
            if (slope == 0.0 || !std::isfinite(slope)) continue;
            Vec3 cand = best;
            cand[axis] = std::clamp(cand[axis] - (slope > 0.0 ? step : -step), -r, r);
            const double c = cost(cand);
            if (c < best_cost) {
                best_cost = c;
                best = cand;
            }
        }
    }
    entry.delta = best;
    entry.cost_after = best_cost;
}

}  // namespace

DisplacementSolution optimize_displacements(const SceneBundle& scene_tgt, const FeatureField& field_tgt,
                                            const FeatureField& field_ref,
                                            const std::map<std::string, AffineMap>& object_maps,
                                            const OptimConfig& cfg) {
    cfg.check();
    if (field_tgt.dim() != field_ref.dim()) {
        throw ArgumentError("feature dimension mismatch between target and reference fields");
    }

    DisplacementSolution sol;
    for (const auto& obj : scene_tgt.objects) {
        auto it = object_maps.find(obj.id);
        if (it == object_maps.end()) throw ArgumentError("no coarse map for object '" + obj.id + "'");
        for (auto& s : resample_object_surface(obj, cfg.sample_spacing)) {
            DisplacementEntry e;
            e.point = s.position;
            e.object_id = obj.id;
            e.coarse_target = it->second.apply(s.position);
            sol.entries.push_back(std::move(e));
        }
    }

    const auto offsets = search_offsets(cfg.search_radius, cfg.grid_step);
    parallel_for(sol.entries.size(), [&](std::size_t i) {
        optimize_point(sol.entries[i], field_tgt, field_ref, cfg, offsets);
    });
    return sol;
}

nlohmann::json solution_to_json(const DisplacementSolution& solution) {
    auto v3 = [](const Vec3& v) { return nlohmann::json{v.x(), v.y(), v.z()}; };
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : solution.entries) {
        out.push_back({{"object_id", e.object_id},
                       {"point", v3(e.point)},
                       {"coarse_target", v3(e.coarse_target)},
                       {"delta", v3(e.delta)},
                       {"cost_before", e.cost_before},
                       {"cost_after", e.cost_after}});
    }
    return out;
}

}  // namespace scene_analogy
