#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scene_analogy/scene.hpp"
#include "scene_analogy/tps.hpp"

namespace scene_analogy {

/// Default Chamfer accuracy thresholds in meters.
inline const std::vector<double> kDefaultEvalThresholds{0.15, 0.20, 0.25};

struct EvalReport {
    std::vector<double> thresholds;
    std::vector<double> accuracies;  // one per threshold, fraction in [0, 1]
    std::vector<double> nearest_distances;
    std::size_t point_count = 0;

    nlohmann::json to_json() const;
    /// Aligned text table: a threshold header row and an accuracy row.
    std::string to_table(const std::string& row_label = "map") const;
    /// Accuracies only, two decimals, space separated (e.g. "1.00 1.00 1.00").
    std::string accuracy_row() const;
};

/// Fraction of mapped points whose nearest reference point is strictly
/// closer than each threshold.
EvalReport chamfer_accuracy(std::span<const Vec3> mapped_points, std::span<const Vec3> reference_cloud,
                            std::span<const double> thresholds = kDefaultEvalThresholds);

/// Maps every target sample through the spline and scores it against the
/// union of reference samples.
EvalReport evaluate_map(const ThinPlateSpline& map, const SceneBundle& scene_tgt, const SceneBundle& scene_ref,
                        std::span<const double> thresholds = kDefaultEvalThresholds);

std::vector<Vec3> all_points(const SceneBundle& scene);

}  // namespace scene_analogy
