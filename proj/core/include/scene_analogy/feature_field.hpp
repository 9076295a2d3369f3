#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scene_analogy/point_index.hpp"
#include "scene_analogy/scene.hpp"

namespace scene_analogy {

inline constexpr std::size_t kDefaultFieldK = 100;

struct FieldConfig {
    std::size_t k = kDefaultFieldK;
    double power = 2.0;     // IDW exponent
    double epsilon = 1e-9;  // meters; closer than this snaps to the sample

    void check() const;
};

/// Continuous feature field R^3 -> R^D: inverse-distance-weighted
/// interpolation over the k nearest stored samples.
///
/// A query closer than `epsilon` to one or more samples returns the mean of
/// those samples' features, so the field interpolates its samples exactly.
/// Immutable once built; query() is safe to call from many threads and the
/// result does not depend on which thread asks.
class FeatureField {
public:
    using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    FeatureField(std::vector<Vec3> positions, FeatureMatrix features, const FieldConfig& cfg = {});

    int dim() const noexcept { return static_cast<int>(features_.cols()); }
    std::size_t size() const noexcept { return index_.size(); }
    std::size_t effective_k() const noexcept { return k_; }
    const FieldConfig& config() const noexcept { return cfg_; }
    const PointIndex& index() const noexcept { return index_; }
    Eigen::Ref<const Eigen::VectorXd> feature(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)).transpose(); }

    Eigen::VectorXd query(const Vec3& q) const;
    /// Allocation-free variant; `out` must already have dim() entries.
    void query_into(const Vec3& q, Eigen::Ref<Eigen::VectorXd> out) const;

private:
    PointIndex index_;
    FeatureMatrix features_;
    FieldConfig cfg_;
    std::size_t k_ = 0;
};

/// Field over the union of every object's point samples. k is clamped to
/// the total sample count.
FeatureField build_field(const SceneBundle& scene, const FieldConfig& cfg = {});
FeatureField build_field(std::span<const PointSample> samples, const FieldConfig& cfg = {});

/// ||field_tgt(p) - field_ref(p_ref)||_2
double residual(const FeatureField& field_tgt, const FeatureField& field_ref, const Vec3& p, const Vec3& p_ref);

}  // namespace scene_analogy
