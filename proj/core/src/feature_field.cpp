#include "scene_analogy/feature_field.hpp"

#include <cmath>
#include <string>

namespace scene_analogy {

void FieldConfig::check() const {
    if (k < 1) throw ArgumentError("field k must be at least 1");
    if (!(power > 0.0) || !std::isfinite(power)) throw ArgumentError("IDW power must be positive");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ArgumentError("field epsilon must be positive");
}

FeatureField::FeatureField(std::vector<Vec3> positions, FeatureMatrix features, const FieldConfig& cfg)
    : features_(std::move(features)), cfg_(cfg) {
    cfg_.check();
    if (positions.empty()) throw ArgumentError("feature field needs at least one sample");
    if (static_cast<std::size_t>(features_.rows()) != positions.size()) {
        throw ArgumentError("feature rows (" + std::to_string(features_.rows()) + ") != sample count (" +
                            std::to_string(positions.size()) + ")");
    }
    if (features_.cols() < 1) throw ArgumentError("feature dimension must be positive");
    index_ = PointIndex(std::move(positions));
    k_ = std::min(cfg_.k, index_.size());
}

Eigen::VectorXd FeatureField::query(const Vec3& q) const {
    Eigen::VectorXd out(dim());
    query_into(q, out);
    return out;
}

void FeatureField::query_into(const Vec3& q, Eigen::Ref<Eigen::VectorXd> out) const {
    if (!q.allFinite()) throw ArgumentError("feature field query must be finite");
    // The previous answer for this field seeds the search radius; queries
    // from one worker tend to be close together.
    struct Slot {
        const FeatureField* owner = nullptr;
        std::vector<PointIndex::Neighbor> neighbors;
    };
    thread_local Slot slots[2];
    thread_local unsigned next_slot = 0;
    Slot* slot = slots[0].owner == this ? &slots[0] : (slots[1].owner == this ? &slots[1] : nullptr);
    if (!slot) {
        slot = &slots[next_slot];
        next_slot ^= 1u;
        slot->owner = this;
        slot->neighbors.clear();
    }
    auto& neighbors = slot->neighbors;
    index_.knn(q, k_, neighbors, neighbors);

    out.setZero();
    const double eps2 = cfg_.epsilon * cfg_.epsilon;
    if (neighbors.front().dist2 < eps2) {
        std::size_t count = 0;
        for (const auto& nb : neighbors) {
            if (!(nb.dist2 < eps2)) break;
            out += features_.row(static_cast<Eigen::Index>(nb.index)).transpose();
            ++count;
        }
        out /= static_cast<double>(count);
        return;
    }

    const bool squared_power = cfg_.power == 2.0;
    const double half_power = 0.5 * cfg_.power;
    double weight_sum = 0.0;
    for (const auto& nb : neighbors) {
        const double w = squared_power ? 1.0 / nb.dist2 : std::pow(nb.dist2, -half_power);
        out += w * features_.row(static_cast<Eigen::Index>(nb.index)).transpose();
        weight_sum += w;
    }
    out /= weight_sum;
}

FeatureField build_field(const SceneBundle& scene, const FieldConfig& cfg) {
    const auto total = scene.total_points();
    if (total == 0) throw ArgumentError("cannot build a feature field over an empty scene");
    if (scene.feature_dim <= 0) throw ArgumentError("scene feature_dim must be positive");
    std::vector<Vec3> positions;
    positions.reserve(total);
    FeatureField::FeatureMatrix features(static_cast<Eigen::Index>(total), scene.feature_dim);
    Eigen::Index row = 0;
    for (const auto& o : scene.objects) {
        if (o.point_features.size() != o.points.size()) {
            throw ArgumentError("object '" + o.id + "' has mismatched feature rows");
        }
        for (std::size_t i = 0; i < o.points.size(); ++i) {
            if (o.point_features[i].size() != scene.feature_dim) {
                throw ArgumentError("object '" + o.id + "' has a feature of the wrong length");
            }
            positions.push_back(o.points[i]);
            features.row(row++) = o.point_features[i].transpose();
        }
    }
    return FeatureField(std::move(positions), std::move(features), cfg);
}

FeatureField build_field(std::span<const PointSample> samples, const FieldConfig& cfg) {
    if (samples.empty()) throw ArgumentError("cannot build a feature field without samples");
    const auto dim = samples.front().feature.size();
    std::vector<Vec3> positions;
    positions.reserve(samples.size());
    FeatureField::FeatureMatrix features(static_cast<Eigen::Index>(samples.size()), dim);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].feature.size() != dim) throw ArgumentError("samples disagree on feature dimension");
        positions.push_back(samples[i].position);
        features.row(static_cast<Eigen::Index>(i)) = samples[i].feature.transpose();
    }
    return FeatureField(std::move(positions), std::move(features), cfg);
}

double residual(const FeatureField& field_tgt, const FeatureField& field_ref, const Vec3& p, const Vec3& p_ref) {
    if (field_tgt.dim() != field_ref.dim()) {
        throw ArgumentError("feature dimension mismatch: " + std::to_string(field_tgt.dim()) + " vs " +
                            std::to_string(field_ref.dim()));
    }
    return (field_tgt.query(p) - field_ref.query(p_ref)).norm();
}

}  // namespace scene_analogy
