#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scene_analogy/coarse_align.hpp"
#include "scene_analogy/point_index.hpp"
#include "scene_analogy/scene.hpp"

namespace scene_analogy::testkit {

struct BoxTemplate {
    std::string label;
    Vec3 extents;  // full side lengths, meters
};

struct Placement {
    std::size_t template_index = 0;
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();  // box center
};

/// Procedural scene description. Point features are a random-Fourier map of
/// each point's coordinates in its object's local frame, seeded by label, so
/// they do not change when the object moves.
struct SynthSpec {
    std::uint64_t seed = 0;
    std::string name = "synth";
    std::vector<BoxTemplate> templates;
    std::vector<Placement> layout;
    int feature_dim = 16;
    int embedding_dim = 32;
    double point_spacing = 0.05;
    double feature_noise = 0.0;
    double feature_length_scale = 0.2;  // meters; wavelength scale of the Fourier features

    void check() const;
};

/// A map applied to the objects listed in `objects` (layout indices).
struct GroupTransform {
    std::vector<std::size_t> objects;
    AffineMap transform;
};

/// Ground-truth correspondence for a generated pair. A query point follows
/// the transform of the group owning its nearest target sample.
class GroundTruth {
public:
    GroundTruth() = default;
    GroundTruth(const SceneBundle& target, std::vector<GroupTransform> groups);

    Vec3 map(const Vec3& p) const;
    std::size_t group_of_object(std::size_t object_index) const { return object_group_.at(object_index); }
    const std::vector<GroupTransform>& groups() const noexcept { return groups_; }

    nlohmann::json to_json(const SceneBundle& target) const;

private:
    std::vector<GroupTransform> groups_;
    std::vector<std::size_t> object_group_;
    std::vector<std::size_t> point_owner_;
    PointIndex index_;
};

struct ScenePair {
    SceneBundle target;
    SceneBundle reference;
    GroundTruth truth;
};

Mat3 rotation_about(const Vec3& axis, double angle_deg);

/// Unit embedding derived from a hash of the label (and the spec seed).
Eigen::VectorXd label_embedding(const std::string& label, std::uint64_t seed, int dim);

SceneBundle gen_scene(const SynthSpec& spec);

/// Target = gen_scene(spec); reference = each group moved by its transform.
/// `groups` must partition the layout indices.
ScenePair gen_pair(const SynthSpec& spec, const std::vector<GroupTransform>& groups);

SynthSpec spec_from_json(const nlohmann::json& j);
std::vector<GroupTransform> groups_from_json(const nlohmann::json& j, std::size_t n_objects);
nlohmann::json spec_to_json(const SynthSpec& spec, const std::vector<GroupTransform>& groups);

/// Compact random layout: `n_objects` boxes with distinct labels standing on
/// the floor in a jittered grid with ~0.8 m pitch.
SynthSpec random_layout(std::uint64_t seed, std::size_t n_objects, double point_spacing = 0.05);

/// Fixed small living-room scene used by the CLI sample spec.
SynthSpec default_spec();

}  // namespace scene_analogy::testkit
