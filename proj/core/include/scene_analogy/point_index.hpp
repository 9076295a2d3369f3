#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "scene_analogy/scene.hpp"

namespace scene_analogy {

/// Static kd-tree over 3D points for k-nearest-neighbor queries.
///
/// Results are ordered by (squared distance, original index), which makes the
/// neighbor set unique even when several points are equidistant from the
/// query. Immutable after construction; queries are safe to run concurrently.
class PointIndex {
public:
    struct Neighbor {
        std::size_t index;  // position in the input vector
        double dist2;
    };

    PointIndex() = default;
    explicit PointIndex(std::vector<Vec3> points, std::size_t leaf_size = 12);

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    const Vec3& point(std::size_t index) const { return points_[index]; }
    const std::vector<Vec3>& points() const noexcept { return points_; }

    /// Fills `out` with the min(k, size()) nearest points, closest first.
    void knn(const Vec3& query, std::size_t k, std::vector<Neighbor>& out) const;
    std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;
    /// Same result as knn(), but `hint` (typically the answer for a nearby
    /// query) bounds the search radius. Any hint is accepted; hints with fewer
    /// than k distinct valid indices are ignored. `out` may alias `hint`.
    void knn(const Vec3& query, std::size_t k, std::vector<Neighbor>& out, std::span<const Neighbor> hint) const;

    Neighbor nearest(const Vec3& query) const;

private:
    struct Node {
        Eigen::Vector3d lo, hi;  // bounding box
        std::uint32_t begin, end;  // range into order_
        std::int32_t left = -1, right = -1;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::int32_t node, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const;
    void collect_within(const Vec3& q, double bound2, std::vector<Neighbor>& out) const;
    double local_bound(const Vec3& q, std::size_t k, std::vector<Neighbor>& scratch) const;

    std::vector<Vec3> points_;
    std::vector<Vec3> ordered_;  // points_ permuted into leaf order
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::size_t leaf_size_ = 12;
};

}  // namespace scene_analogy
