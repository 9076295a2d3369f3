#include "scene_analogy/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "scene_analogy/parallel.hpp"
#include "scene_analogy/point_index.hpp"

namespace scene_analogy {

std::vector<Vec3> all_points(const SceneBundle& scene) {
    std::vector<Vec3> out;
    out.reserve(scene.total_points());
    for (const auto& o : scene.objects) out.insert(out.end(), o.points.begin(), o.points.end());
    return out;
}

EvalReport chamfer_accuracy(std::span<const Vec3> mapped_points, std::span<const Vec3> reference_cloud,
                            std::span<const double> thresholds) {
    if (mapped_points.empty() || reference_cloud.empty()) {
        throw ArgumentError("chamfer accuracy needs non-empty point sets");
    }
    for (double t : thresholds) {
        if (!(t > 0.0) || !std::isfinite(t)) throw ArgumentError("thresholds must be positive");
    }
    for (const auto& p : mapped_points) {
        if (!p.allFinite()) throw ArgumentError("mapped points must be finite");
    }

    const PointIndex index(std::vector<Vec3>(reference_cloud.begin(), reference_cloud.end()));
    EvalReport report;
    report.thresholds.assign(thresholds.begin(), thresholds.end());
    report.point_count = mapped_points.size();
    report.nearest_distances.resize(mapped_points.size());
    parallel_for(mapped_points.size(), [&](std::size_t i) {
        report.nearest_distances[i] = std::sqrt(index.nearest(mapped_points[i]).dist2);
    });
    for (double t : thresholds) {
        std::size_t hits = 0;
        for (double d : report.nearest_distances) hits += d < t ? 1 : 0;
        report.accuracies.push_back(static_cast<double>(hits) / static_cast<double>(mapped_points.size()));
    }
    return report;
}

EvalReport evaluate_map(const ThinPlateSpline& map, const SceneBundle& scene_tgt, const SceneBundle& scene_ref,
                        std::span<const double> thresholds) {
    const auto source = all_points(scene_tgt);
    const auto mapped = map.apply(source);
    return chamfer_accuracy(mapped, all_points(scene_ref), thresholds);
}

nlohmann::json EvalReport::to_json() const {
    return {{"metric", "chamfer_accuracy"},
            {"thresholds", thresholds},
            {"accuracies", accuracies},
            {"point_count", point_count},
            {"nearest_distances", nearest_distances}};
}

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string EvalReport::accuracy_row() const {
    std::string row;
    for (std::size_t i = 0; i < accuracies.size(); ++i) {
        if (i) row += ' ';
        row += fixed2(accuracies[i]);
    }
    return row;
}

std::string EvalReport::to_table(const std::string& row_label) const {
    const std::size_t label_width = std::max<std::size_t>(row_label.size(), 9);
    auto pad = [&](const std::string& s) { return s + std::string(label_width - s.size(), ' '); };
    std::ostringstream os;
    os << pad("Metric") << " | Chamfer Acc.\n";
    os << pad("Threshold") << " |";
    for (double t : thresholds) os << ' ' << fixed2(t);
    os << '\n' << pad(row_label) << " |";
    for (double a : accuracies) os << ' ' << fixed2(a);
    os << '\n';
    return os.str();
}

}  // namespace scene_analogy
