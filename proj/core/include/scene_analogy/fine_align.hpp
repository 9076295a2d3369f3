#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scene_analogy/coarse_align.hpp"
#include "scene_analogy/feature_field.hpp"

namespace scene_analogy {

/// Search settings for the per-point displacement optimizer. Lengths in meters.
struct OptimConfig {
    double sample_spacing = 0.05;
    double search_radius = 0.3;  // bound on |delta|_inf
    double grid_step = 0.05;
    int descent_iters = 20;
    double descent_step0 = 0.02;
    double fd_epsilon = 1e-3;

    void check() const;
};

struct DisplacementEntry {
    Vec3 point;          // p_k on the target surface
    std::string object_id;
    Vec3 coarse_target;  // A_i p_k + b_i
    Vec3 delta = Vec3::Zero();
    double cost_before = 0.0;  // residual at delta = 0
    double cost_after = 0.0;   // residual at the optimized delta

    Vec3 mapped() const { return coarse_target + delta; }
};

struct DisplacementSolution {
    std::vector<DisplacementEntry> entries;

    double total_cost_before() const;
    double total_cost_after() const;
    double mean_delta_norm() const;
};

/// Sum over entries of ||phi_tgt(p_k) - phi_ref(coarse_target + delta)||.
double fine_cost(const DisplacementSolution& solution, const FeatureField& field_tgt,
                 const FeatureField& field_ref);

/// Minimizes each point's feature residual independently: exhaustive search
/// on the axis-aligned grid {-R..R}^3 with step grid_step (lexicographically
/// first minimum wins), then coordinate-wise sign descent that only accepts
/// improving steps and stays inside the box.
DisplacementSolution optimize_displacements(const SceneBundle& scene_tgt, const FeatureField& field_tgt,
                                            const FeatureField& field_ref,
                                            const std::map<std::string, AffineMap>& object_maps,
                                            const OptimConfig& cfg = {});

/// Symmetric grid offsets used by the coarse stage; always contains 0.
std::vector<double> search_offsets(double radius, double step);

nlohmann::json solution_to_json(const DisplacementSolution& solution);

}  // namespace scene_analogy
