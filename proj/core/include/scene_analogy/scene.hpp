#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "scene_analogy/errors.hpp"

namespace scene_analogy {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// One segmented object: surface samples with per-point shape features and a
/// single whole-object embedding. Lengths are meters.
struct ObjectInstance {
    std::string id;
    std::optional<std::string> label;
    Vec3 centroid = Vec3::Zero();
    std::vector<Vec3> points;
    std::vector<Eigen::VectorXd> point_features;
    Eigen::VectorXd embedding;
};

struct SceneBundle {
    std::string scene_id;
    int feature_dim = 0;
    int embedding_dim = 0;
    std::vector<ObjectInstance> objects;

    std::size_t total_points() const;
    /// Index of the object with this id, or nullopt.
    std::optional<std::size_t> find(const std::string& object_id) const;
};

/// A surface sample handed to the fine stage.
struct PointSample {
    Vec3 position;
    Eigen::VectorXd feature;
    std::string owner;
};

enum class Severity { warning, error };

struct Diagnostic {
    Severity severity = Severity::error;
    std::string object_id;  // empty for scene-level rules
    std::optional<std::size_t> point_index;
    std::string rule;
    std::string message;

    std::string to_string() const;
};

bool has_errors(std::span<const Diagnostic> diagnostics);

/// Checks every structural invariant of a bundle. Returns one diagnostic per
/// violation; an empty list means the bundle is well formed. A zero-norm
/// embedding is reported as a warning, everything else as an error.
std::vector<Diagnostic> validate_scene(const SceneBundle& scene);

Vec3 mean_point(std::span<const Vec3> points);

/// Parses the normative JSON form. Missing centroids are filled with the
/// point mean. Throws FormatError on schema problems (with a field path)
/// and ValidationError when any error-level diagnostic remains.
SceneBundle scene_from_json(const nlohmann::json& doc);
SceneBundle parse_scene_json(const std::string& text);
nlohmann::json scene_to_json(const SceneBundle& scene);

/// Loads either the JSON form or the binary sidecar form (detected by magic).
SceneBundle load_scene(const std::filesystem::path& path);
void save_scene(const SceneBundle& scene, const std::filesystem::path& path);

/// Binary sidecar: same schema, little-endian, u32 length prefixes and
/// float32 arrays. Centroids are not stored; they are recomputed on load.
void save_scene_binary(const SceneBundle& scene, const std::filesystem::path& path);
SceneBundle load_scene_binary(const std::filesystem::path& path);

/// Voxel-grid downsampling at cell size `spacing`: one sample per occupied
/// cell, the stored point nearest the cell center (lowest index on ties).
/// Samples come back in the object's original point order.
std::vector<PointSample> resample_object_surface(const ObjectInstance& obj, double spacing);

}  // namespace scene_analogy
