#include "scene_analogy/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

namespace scene_analogy::testkit {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kEmbeddingStream = 1;
constexpr std::uint64_t kFeatureStream = 2;
constexpr std::uint64_t kTargetNoiseStream = 3;
constexpr std::uint64_t kReferenceNoiseStream = 4;

/// Random-Fourier map of local coordinates, fixed per (label, seed).
class FourierFeatures {
public:
    FourierFeatures(const std::string& label, std::uint64_t seed, int dim, double length_scale)
        : omega_(dim, 3), phase_(dim), scale_(std::sqrt(2.0 / dim)) {
        std::mt19937_64 rng(mix(mix(fnv1a(label), seed), kFeatureStream));
        std::normal_distribution<double> normal(0.0, 1.0 / length_scale);
        std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
        for (int d = 0; d < dim; ++d) {
            for (int c = 0; c < 3; ++c) omega_(d, c) = normal(rng);
            phase_[d] = uniform(rng);
        }
    }

    Eigen::VectorXd operator()(const Vec3& local) const {
        return scale_ * (omega_ * local + phase_).array().cos().matrix();
    }

private:
    Eigen::Matrix<double, Eigen::Dynamic, 3> omega_;
    Eigen::VectorXd phase_;
    double scale_;
};

std::vector<Vec3> box_surface(const Vec3& extents, double spacing) {
    std::array<int, 3> n{};
    for (int a = 0; a < 3; ++a) n[a] = std::max(1, static_cast<int>(std::lround(extents[a] / spacing)));
    std::vector<Vec3> out;
    for (int i = 0; i <= n[0]; ++i) {
        for (int j = 0; j <= n[1]; ++j) {
            for (int k = 0; k <= n[2]; ++k) {
                const bool boundary = i == 0 || i == n[0] || j == 0 || j == n[1] || k == 0 || k == n[2];
                if (!boundary) continue;
                out.emplace_back(-0.5 * extents[0] + extents[0] * i / n[0], -0.5 * extents[1] + extents[1] * j / n[1],
                                 -0.5 * extents[2] + extents[2] * k / n[2]);
            }
        }
    }
    return out;
}

std::vector<Eigen::VectorXd> object_features(const SynthSpec& spec, const std::string& label,
                                             const std::vector<Vec3>& local, std::size_t object_index,
                                             std::uint64_t noise_stream) {
    const FourierFeatures phi(label, spec.seed, spec.feature_dim, spec.feature_length_scale);
    std::vector<Eigen::VectorXd> out;
    out.reserve(local.size());
    std::mt19937_64 rng(mix(mix(spec.seed, object_index), noise_stream));
    std::normal_distribution<double> noise(0.0, spec.feature_noise > 0.0 ? spec.feature_noise : 1.0);
    for (const auto& p : local) {
        Eigen::VectorXd f = phi(p);
        if (spec.feature_noise > 0.0) {
            for (Eigen::Index d = 0; d < f.size(); ++d) f[d] += noise(rng);
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace

void SynthSpec::check() const {
    if (feature_dim < 1 || embedding_dim < 1) throw ArgumentError("synthetic dims must be positive");
    if (!(point_spacing > 0.0)) throw ArgumentError("point spacing must be positive");
    if (!(feature_noise >= 0.0)) throw ArgumentError("feature noise must be non-negative");
    if (!(feature_length_scale > 0.0)) throw ArgumentError("feature length scale must be positive");
    if (layout.empty()) throw ArgumentError("synthetic layout is empty");
    for (const auto& t : templates) {
        if (!(t.extents.minCoeff() > 0.0)) throw ArgumentError("template '" + t.label + "' has a non-positive extent");
    }
    for (const auto& p : layout) {
        if (p.template_index >= templates.size()) throw ArgumentError("layout references a missing template");
        const Mat3& r = p.rotation;
        if (!((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9) || r.determinant() < 0.0) {
            throw ArgumentError("layout poses must be rigid");
        }
    }
}

Mat3 rotation_about(const Vec3& axis, double angle_deg) {
    if (!(axis.norm() > 0.0)) throw ArgumentError("rotation axis must be non-zero");
    return Eigen::AngleAxisd(angle_deg * std::numbers::pi / 180.0, axis.normalized()).toRotationMatrix();
}

Eigen::VectorXd label_embedding(const std::string& label, std::uint64_t seed, int dim) {
    std::mt19937_64 rng(mix(mix(fnv1a(label), seed), kEmbeddingStream));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd e(dim);
    for (int i = 0; i < dim; ++i) e[i] = normal(rng);
    return e.normalized();
}

SceneBundle gen_scene(const SynthSpec& spec) {
    spec.check();
    SceneBundle scene;
    scene.scene_id = spec.name + "_target";
    scene.feature_dim = spec.feature_dim;
    scene.embedding_dim = spec.embedding_dim;
    for (std::size_t i = 0; i < spec.layout.size(); ++i) {
        const auto& place = spec.layout[i];
        const auto& tmpl = spec.templates[place.template_index];
        const auto local = box_surface(tmpl.extents, spec.point_spacing);
        ObjectInstance obj;
        obj.id = "obj_" + std::to_string(i);
        obj.label = tmpl.label;
        obj.points.reserve(local.size());
        for (const auto& p : local) obj.points.push_back(place.rotation * p + place.translation);
        obj.point_features = object_features(spec, tmpl.label, local, i, kTargetNoiseStream);
        obj.embedding = label_embedding(tmpl.label, spec.seed, spec.embedding_dim);
        obj.centroid = mean_point(obj.points);
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

ScenePair gen_pair(const SynthSpec& spec, const std::vector<GroupTransform>& groups) {
    const auto n = spec.layout.size();
    std::vector<int> owner(n, -1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (auto idx : groups[g].objects) {
            if (idx >= n) throw ArgumentError("group references object " + std::to_string(idx) + " outside the layout");
            if (owner[idx] >= 0) throw ArgumentError("object " + std::to_string(idx) + " appears in more than one group");
            owner[idx] = static_cast<int>(g);
        }
        if (!(std::abs(groups[g].transform.A.determinant()) > 1e-9)) {
            throw ArgumentError("group transforms must be invertible");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (owner[i] < 0) throw ArgumentError("object " + std::to_string(i) + " is not assigned to any group");
    }

    ScenePair pair;
    pair.target = gen_scene(spec);
    pair.reference = pair.target;
    pair.reference.scene_id = spec.name + "_reference";
    for (std::size_t i = 0; i < n; ++i) {
        const auto& tf = groups[static_cast<std::size_t>(owner[i])].transform;
        auto& obj = pair.reference.objects[i];
        for (auto& p : obj.points) p = tf.apply(p);
        obj.centroid = mean_point(obj.points);
        const auto& place = spec.layout[i];
        const auto local = box_surface(spec.templates[place.template_index].extents, spec.point_spacing);
        obj.point_features =
            object_features(spec, spec.templates[place.template_index].label, local, i, kReferenceNoiseStream);
    }
    pair.truth = GroundTruth(pair.target, groups);
    return pair;
}

GroundTruth::GroundTruth(const SceneBundle& target, std::vector<GroupTransform> groups)
    : groups_(std::move(groups)), object_group_(target.objects.size(), 0) {
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        for (auto idx : groups_[g].objects) object_group_.at(idx) = g;
    }
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < target.objects.size(); ++i) {
        for (const auto& p : target.objects[i].points) {
            pts.push_back(p);
            point_owner_.push_back(i);
        }
    }
    index_ = PointIndex(std::move(pts));
}

Vec3 GroundTruth::map(const Vec3& p) const {
    const auto nb = index_.nearest(p);
    return groups_[object_group_[point_owner_[nb.index]]].transform.apply(p);
}

nlohmann::json GroundTruth::to_json(const SceneBundle& target) const {
    nlohmann::json gs = nlohmann::json::array();
    for (const auto& g : groups_) {
        nlohmann::json ids = nlohmann::json::array();
        for (auto idx : g.objects) ids.push_back(target.objects.at(idx).id);
        gs.push_back({{"object_ids", ids}, {"transform", affine_to_json(g.transform)}});
    }
    return {{"target_scene", target.scene_id},
            {"rule", "a point follows the transform of the group owning its nearest target sample"},
            {"groups", gs}};
}

// ---------------------------------------------------------------------------
// JSON

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw FormatError(where, "unknown key '" + key + "'");
        }
    }
}

Vec3 vec3_of(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw FormatError(where, "expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Mat3 rotation_of(const nlohmann::json& j, const std::string& where) {
    Vec3 axis = Vec3::UnitZ();
    if (auto it = j.find("axis"); it != j.end()) axis = vec3_of(*it, where + ".axis");
    double angle = 0.0;
    if (auto it = j.find("angle_deg"); it != j.end()) angle = it->get<double>();
    if (auto it = j.find("yaw_deg"); it != j.end()) {
        if (j.contains("angle_deg")) throw FormatError(where, "give yaw_deg or angle_deg, not both");
        angle = it->get<double>();
        axis = Vec3::UnitZ();
    }
    return rotation_about(axis, angle);
}

}  // namespace

SynthSpec spec_from_json(const nlohmann::json& j) {
    try {
        reject_unknown(j,
                       {"seed", "name", "templates", "layout", "groups", "feature_dim", "embedding_dim",
                        "point_spacing", "feature_noise", "feature_length_scale"},
                       "$");
        SynthSpec s;
        s.seed = j.value("seed", std::uint64_t{0});
        s.name = j.value("name", std::string("synth"));
        s.feature_dim = j.value("feature_dim", 16);
        s.embedding_dim = j.value("embedding_dim", 32);
        s.point_spacing = j.value("point_spacing", 0.05);
        s.feature_noise = j.value("feature_noise", 0.0);
        s.feature_length_scale = j.value("feature_length_scale", 0.2);
        const auto& templates = j.at("templates");
        for (std::size_t i = 0; i < templates.size(); ++i) {
            const std::string where = "templates[" + std::to_string(i) + "]";
            reject_unknown(templates[i], {"label", "extents"}, where);
            s.templates.push_back({templates[i].at("label").get<std::string>(),
                                   vec3_of(templates[i].at("extents"), where + ".extents")});
        }
        const auto& layout = j.at("layout");
        for (std::size_t i = 0; i < layout.size(); ++i) {
            const std::string where = "layout[" + std::to_string(i) + "]";
            reject_unknown(layout[i], {"template", "translation", "yaw_deg", "axis", "angle_deg"}, where);
            Placement p;
            p.template_index = layout[i].at("template").get<std::size_t>();
            p.translation = vec3_of(layout[i].at("translation"), where + ".translation");
            p.rotation = rotation_of(layout[i], where);
            s.layout.push_back(p);
        }
        s.check();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("synth spec", e.what());
    }
}

std::vector<GroupTransform> groups_from_json(const nlohmann::json& j, std::size_t n_objects) {
    std::vector<GroupTransform> out;
    auto it = j.find("groups");
    if (it == j.end()) {
        GroupTransform all;
        for (std::size_t i = 0; i < n_objects; ++i) all.objects.push_back(i);
        out.push_back(std::move(all));
        return out;
    }
    try {
        for (std::size_t g = 0; g < it->size(); ++g) {
            const auto& gj = (*it)[g];
            const std::string where = "groups[" + std::to_string(g) + "]";
            reject_unknown(gj, {"objects", "translation", "yaw_deg", "axis", "angle_deg", "pivot", "matrix"}, where);
            GroupTransform gt;
            gt.objects = gj.at("objects").get<std::vector<std::size_t>>();
            Mat3 a = rotation_of(gj, where);
            if (auto m = gj.find("matrix"); m != gj.end()) {
                if (!m->is_array() || m->size() != 9) throw FormatError(where + ".matrix", "expected 9 numbers");
                for (int r = 0; r < 3; ++r) {
                    for (int c = 0; c < 3; ++c) a(r, c) = (*m)[static_cast<std::size_t>(3 * r + c)].get<double>();
                }
            }
            const Vec3 t = gj.contains("translation") ? vec3_of(gj.at("translation"), where + ".translation")
                                                      : Vec3::Zero();
            const Vec3 pivot = gj.contains("pivot") ? vec3_of(gj.at("pivot"), where + ".pivot") : Vec3::Zero();
            gt.transform.A = a;
            gt.transform.b = pivot + t - a * pivot;
            gt.transform.kind = gj.contains("matrix") ? AffineKind::affine : AffineKind::similarity;
            out.push_back(std::move(gt));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("groups", e.what());
    }
    return out;
}

nlohmann::json spec_to_json(const SynthSpec& spec, const std::vector<GroupTransform>& groups) {
    nlohmann::json templates = nlohmann::json::array();
    for (const auto& t : spec.templates) {
        templates.push_back({{"label", t.label}, {"extents", {t.extents.x(), t.extents.y(), t.extents.z()}}});
    }
    nlohmann::json layout = nlohmann::json::array();
    for (const auto& p : spec.layout) {
        const Eigen::AngleAxisd aa(p.rotation);
        layout.push_back({{"template", p.template_index},
                          {"translation", {p.translation.x(), p.translation.y(), p.translation.z()}},
                          {"axis", {aa.axis().x(), aa.axis().y(), aa.axis().z()}},
                          {"angle_deg", aa.angle() * 180.0 / std::numbers::pi}});
    }
    nlohmann::json gs = nlohmann::json::array();
    for (const auto& g : groups) {
        nlohmann::json m = nlohmann::json::array();
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m.push_back(g.transform.A(r, c));
        }
        gs.push_back({{"objects", g.objects},
                      {"matrix", m},
                      {"translation", {g.transform.b.x(), g.transform.b.y(), g.transform.b.z()}}});
    }
    return {{"seed", spec.seed},
            {"name", spec.name},
            {"feature_dim", spec.feature_dim},
            {"embedding_dim", spec.embedding_dim},
            {"point_spacing", spec.point_spacing},
            {"feature_noise", spec.feature_noise},
            {"feature_length_scale", spec.feature_length_scale},
            {"templates", templates},
            {"layout", layout},
            {"groups", gs}};
}

SynthSpec random_layout(std::uint64_t seed, std::size_t n_objects, double point_spacing) {
    static const std::vector<std::string> kLabels{"table", "chair", "sofa", "lamp", "cabinet", "bed",
                                                  "desk", "shelf", "plant", "television", "stool", "dresser",
                                                  "armchair", "bench", "wardrobe", "nightstand"};
    if (n_objects == 0 || n_objects > kLabels.size()) throw ArgumentError("random_layout supports 1..16 objects");
    std::mt19937_64 rng(mix(seed, 0x5ca1ab1eull));
    std::uniform_real_distribution<double> footprint(0.25, 0.55);
    std::uniform_real_distribution<double> height(0.3, 1.0);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    std::uniform_real_distribution<double> yaw(-180.0, 180.0);

    std::vector<std::size_t> label_order(kLabels.size());
    std::iota(label_order.begin(), label_order.end(), std::size_t{0});
    std::shuffle(label_order.begin(), label_order.end(), rng);

    SynthSpec s;
    s.seed = seed;
    s.name = "random_" + std::to_string(seed);
    s.point_spacing = point_spacing;
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_objects))));
    constexpr double kPitch = 0.8;
    for (std::size_t i = 0; i < n_objects; ++i) {
        const Vec3 ext(footprint(rng), footprint(rng), height(rng));
        s.templates.push_back({kLabels[label_order[i]], ext});
        Placement p;
        p.template_index = i;
        p.rotation = rotation_about(Vec3::UnitZ(), yaw(rng));
        p.translation = Vec3(static_cast<double>(i % cols) * kPitch + jitter(rng),
                             static_cast<double>(i / cols) * kPitch + jitter(rng), 0.5 * ext.z());
        s.layout.push_back(p);
    }
    return s;
}

SynthSpec default_spec() {
    SynthSpec s;
    s.seed = 7;
    s.name = "living_room";
    s.templates = {{"table", {1.0, 0.6, 0.75}},
                   {"chair", {0.45, 0.45, 0.9}},
                   {"sofa", {1.6, 0.8, 0.8}},
                   {"lamp", {0.3, 0.3, 1.5}},
                   {"cabinet", {0.8, 0.4, 1.1}}};
    auto place = [&](std::size_t t, Vec3 xy_center, double yaw) {
        Placement p;
        p.template_index = t;
        p.rotation = rotation_about(Vec3::UnitZ(), yaw);
        p.translation = Vec3(xy_center.x(), xy_center.y(), 0.5 * s.templates[t].extents.z());
        s.layout.push_back(p);
    };
    place(0, {0.0, 0.0, 0.0}, 0.0);
    place(1, {0.0, 0.7, 0.0}, 180.0);
    place(1, {0.8, -0.1, 0.0}, 90.0);
    place(3, {-0.9, 0.6, 0.0}, 0.0);
    place(2, {3.0, 0.0, 0.0}, 90.0);
    place(4, {3.4, 1.2, 0.0}, 0.0);
    return s;
}

}  // namespace scene_analogy::testkit
