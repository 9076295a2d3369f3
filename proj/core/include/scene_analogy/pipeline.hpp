#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scene_analogy/coarse_align.hpp"
#include "scene_analogy/evaluation.hpp"
#include "scene_analogy/feature_field.hpp"
#include "scene_analogy/fine_align.hpp"
#include "scene_analogy/graph.hpp"
#include "scene_analogy/matcher.hpp"
#include "scene_analogy/tps.hpp"
#include "scene_analogy/transfer.hpp"

namespace scene_analogy {

/// Every tunable of the pipeline in one place. Serialized as nested JSON
/// sections (graph, matching, clustering, field, fine, tps, eval, planning);
/// unknown keys are rejected.
struct PipelineConfig {
    std::uint64_t seed = 0;
    double edge_threshold = kDefaultEdgeThreshold;
    AffinityConfig affinity;
    double cluster_eps = 0.75;
    std::size_t cluster_min_pts = 2;
    FieldConfig field;
    OptimConfig optim;
    double tps_lambda = kDefaultTpsLambda;
    std::size_t max_control_points = 2000;  // 0 disables the cap
    std::vector<double> eval_thresholds = kDefaultEvalThresholds;
    PlanningConfig planning;

    void check() const;
    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::filesystem::path& path);
    /// Applies "section.key=value"; the value is parsed as JSON.
    void apply_override(const std::string& assignment);
};

enum class MapFallback { none, identity, dominant_affine };

const char* to_string(MapFallback f);

struct DisplacementStats {
    std::size_t count = 0;
    double mean_delta = 0.0;
    double max_delta_inf = 0.0;
    double cost_before = 0.0;
    double cost_after = 0.0;
};

struct MapProvenance {
    std::string target_scene;
    std::string reference_scene;
    MatchSet matches;
    std::vector<MatchCluster> clusters;
    std::vector<AffineMap> cluster_fits;
    std::map<std::string, AffineKind> object_kinds;
    DisplacementStats displacement;
    std::size_t control_point_pairs = 0;  // before subsampling
    MapFallback fallback = MapFallback::none;
    std::vector<std::string> diagnostics;
};

/// The final smooth map F from target space into reference space.
struct SceneMap {
    ThinPlateSpline spline;
    MapProvenance provenance;
    PipelineConfig config;

    Vec3 apply(const Vec3& q) const { return spline.apply(q); }
};

/// Intermediate products kept for diagnostics and tests.
struct PipelineRun {
    SceneMap map;
    SceneGraph graph_tgt;
    SceneGraph graph_ref;
    std::map<std::string, AffineMap> object_maps;
    DisplacementSolution displacements;
};

/// Graph build -> match -> cluster -> per-cluster affine -> displacement
/// optimization -> TPS. An empty match set yields the identity map; TPS
/// degeneracy falls back to the affine of the largest cluster. Both cases are
/// recorded in the provenance.
PipelineRun run_pipeline(const SceneBundle& scene_tgt, const SceneBundle& scene_ref, const PipelineConfig& cfg = {});
SceneMap build_scene_map(const SceneBundle& scene_tgt, const SceneBundle& scene_ref, const PipelineConfig& cfg = {});

EvalReport evaluate_map(const SceneMap& map, const SceneBundle& scene_tgt, const SceneBundle& scene_ref,
                        std::span<const double> thresholds = kDefaultEvalThresholds);

nlohmann::json scene_map_to_json(const SceneMap& map);
SceneMap scene_map_from_json(const nlohmann::json& j);
void save_scene_map(const SceneMap& map, const std::filesystem::path& path);
SceneMap load_scene_map(const std::filesystem::path& path);

/// Writes `doc` with a trailing newline; output is a pure function of `doc`.
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace scene_analogy
