#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "scene_analogy/coarse_align.hpp"

namespace scene_analogy {

struct PointPair {
    Vec3 source;
    Vec3 target;
};

/// 3D thin-plate spline with the biharmonic kernel phi(r) = r:
///   F(q) = A q + b + sum_j w_j * |q - p_j|
/// The kernel weights satisfy the side conditions sum_j w_j = 0 and
/// sum_j w_j p_j^T = 0, so an affine input is reproduced with w = 0.
struct ThinPlateSpline {
    std::vector<Vec3> control_points;
    Eigen::Matrix<double, Eigen::Dynamic, 3> kernel_weights;
    Mat3 A = Mat3::Identity();
    Vec3 b = Vec3::Zero();
    double lambda = 0.0;

    static ThinPlateSpline from_affine(const AffineMap& map);

    Vec3 apply(const Vec3& q) const;
    std::vector<Vec3> apply(std::span<const Vec3> queries) const;

    /// max |P^T W| over the four side conditions and three output columns.
    double side_condition_residual() const;
};

inline constexpr double kDefaultTpsLambda = 1e-3;

/// Solves [[K + lambda I, P], [P^T, 0]] [W; a] = [Y; 0] with K_ij = |p_i - p_j|
/// and P = [1 | p]. Sources closer than 1e-9 m are merged (targets averaged).
/// Throws DegenerateError for fewer than four distinct or coplanar sources,
/// NumericalError if the system is singular anyway.
ThinPlateSpline fit_tps(std::span<const PointPair> pairs, double lambda = kDefaultTpsLambda);

/// Indices of an evenly strided subset of size min(count, cap).
std::vector<std::size_t> uniform_subsample(std::size_t count, std::size_t cap);

nlohmann::json tps_to_json(const ThinPlateSpline& spline);
ThinPlateSpline tps_from_json(const nlohmann::json& j);

}  // namespace scene_analogy
