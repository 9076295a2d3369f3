#include "scene_analogy/point_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace scene_analogy {

namespace {

struct Closer {
    bool operator()(const PointIndex::Neighbor& a, const PointIndex::Neighbor& b) const noexcept {
        return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
    }
};
constexpr Closer closer{};

// Both distance routines sum the axes in the same order, so the box bound
// never exceeds the distance of a point inside the box after rounding.
inline double dist2(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return (dx * dx + dy * dy) + dz * dz;
}

inline double box_dist2(const Vec3& q, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    double gap[3];
    for (int c = 0; c < 3; ++c) {
        gap[c] = q[c] < lo[c] ? lo[c] - q[c] : (q[c] > hi[c] ? q[c] - hi[c] : 0.0);
    }
    return (gap[0] * gap[0] + gap[1] * gap[1]) + gap[2] * gap[2];
}

}  // namespace

PointIndex::PointIndex(std::vector<Vec3> points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
    for (const auto& p : points_) {
        if (!p.allFinite()) throw ArgumentError("point index requires finite coordinates");
    }
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / leaf_size_ + 2);
        build(0, static_cast<std::uint32_t>(points_.size()));
    }
    ordered_.reserve(points_.size());
    for (auto i : order_) ordered_.push_back(points_[i]);
}

std::int32_t PointIndex::build(std::uint32_t begin, std::uint32_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    node.hi = -node.lo;
    for (auto i = begin; i < end; ++i) {
        node.lo = node.lo.cwiseMin(points_[order_[i]]);
        node.hi = node.hi.cwiseMax(points_[order_[i]]);
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= leaf_size_) return id;

    int axis = 0;
    (node.hi - node.lo).maxCoeff(&axis);
    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double pa = points_[a][axis];
                         const double pb = points_[b][axis];
                         return pa < pb || (pa == pb && a < b);
                     });
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

void PointIndex::search(std::int32_t node_id, const Vec3& q, std::size_t k,
                        std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.left < 0) {
        for (auto i = node.begin; i < node.end; ++i) {
            const Neighbor cand{order_[i], dist2(ordered_[i], q)};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), closer);
            } else if (closer(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), closer);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), closer);
            }
        }
        return;
    }
    const Node& l = nodes_[static_cast<std::size_t>(node.left)];
    const Node& r = nodes_[static_cast<std::size_t>(node.right)];
    const double dl = box_dist2(q, l.lo, l.hi);
    const double dr = box_dist2(q, r.lo, r.hi);
    const bool left_first = dl <= dr;
    const std::int32_t first = left_first ? node.left : node.right;
    const std::int32_t second = left_first ? node.right : node.left;
    const double d_first = left_first ? dl : dr;
    const double d_second = left_first ? dr : dl;

    // Equal lower bounds are still visited: they may hold an equidistant
    // point with a smaller index.
    if (heap.size() < k || d_first <= heap.front().dist2) search(first, q, k, heap);
    if (heap.size() < k || d_second <= heap.front().dist2) search(second, q, k, heap);
}

// Keeps the k best of `cands` under (dist2, index), sorted.
static void select_k(std::vector<PointIndex::Neighbor>& cands, std::size_t k) {
    if (cands.size() > k) {
        std::nth_element(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k), cands.end(), closer);
        cands.resize(k);
    }
    std::sort(cands.begin(), cands.end(), closer);
}

void PointIndex::collect_within(const Vec3& q, double bound2, std::vector<Neighbor>& out) const {
    std::int32_t stack[96];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
        if (box_dist2(q, node.lo, node.hi) > bound2) continue;
        if (node.left < 0) {
            for (auto i = node.begin; i < node.end; ++i) {
                const double d = dist2(ordered_[i], q);
                if (d <= bound2) out.push_back({order_[i], d});
            }
        } else {
            stack[top++] = node.right;
            stack[top++] = node.left;
        }
    }
}

// Squared distance to the k-th nearest point of the smallest subtree around
// q that still holds k points. At least k points lie within it.
double PointIndex::local_bound(const Vec3& q, std::size_t k, std::vector<Neighbor>& scratch) const {
    std::int32_t id = 0;
    for (;;) {
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        if (node.left < 0) break;
        const Node& l = nodes_[static_cast<std::size_t>(node.left)];
        const Node& r = nodes_[static_cast<std::size_t>(node.right)];
        const std::int32_t next = box_dist2(q, l.lo, l.hi) <= box_dist2(q, r.lo, r.hi) ? node.left : node.right;
        const Node& child = nodes_[static_cast<std::size_t>(next)];
        if (child.end - child.begin < k) break;
        id = next;
    }
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    scratch.clear();
    for (auto i = node.begin; i < node.end; ++i) scratch.push_back({order_[i], dist2(ordered_[i], q)});
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end(), closer);
    return scratch[k - 1].dist2;
}

void PointIndex::knn(const Vec3& query, std::size_t k, std::vector<Neighbor>& out) const {
    out.clear();
    k = std::min(k, points_.size());
    if (k == 0) return;
    if (k <= 8) {
        out.reserve(k);
        search(0, query, k, out);
        std::sort_heap(out.begin(), out.end(), closer);
        return;
    }
    const double bound2 = local_bound(query, k, out);
    out.clear();
    collect_within(query, bound2, out);
    select_k(out, k);
}

void PointIndex::knn(const Vec3& query, std::size_t k, std::vector<Neighbor>& out,
                     std::span<const Neighbor> hint) const {
    const std::size_t kk = std::min(k, points_.size());
    if (kk <= 8 || hint.size() < kk) {
        knn(query, k, out);
        return;
    }
    // If k points lie within bound2, the k nearest do too.
    double bound2 = 0.0;
    for (std::size_t i = 0; i < kk; ++i) {
        if (hint[i].index >= points_.size()) {
            knn(query, k, out);
            return;
        }
        bound2 = std::max(bound2, dist2(points_[hint[i].index], query));
    }
    out.clear();
    collect_within(query, bound2, out);
    if (out.size() < kk) {
        knn(query, k, out);
        return;
    }
    select_k(out, kk);
}

std::vector<PointIndex::Neighbor> PointIndex::knn(const Vec3& query, std::size_t k) const {
    std::vector<Neighbor> out;
    knn(query, k, out);
    return out;
}

PointIndex::Neighbor PointIndex::nearest(const Vec3& query) const {
    if (points_.empty()) throw ArgumentError("nearest query on an empty index");
    std::vector<Neighbor> out;
    knn(query, 1, out);
    return out.front();
}

}  // namespace scene_analogy
