#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scene_analogy/scene.hpp"
#include "scene_analogy/tps.hpp"

namespace scene_analogy {

struct Trajectory {
    std::string frame_id;
    std::vector<Vec3> points;
};

nlohmann::json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& j);
Trajectory load_trajectory(const std::filesystem::path& path);

using CellIndex = std::array<int, 3>;

/// Axis-aligned voxel occupancy over the reference scene. A cell is occupied
/// when it contains a scene point or its center lies within inflation_radius
/// of one.
class OccupancyGrid {
public:
    OccupancyGrid(Vec3 origin, double resolution, std::array<int, 3> dims, double inflation_radius);

    const Vec3& origin() const noexcept { return origin_; }
    double resolution() const noexcept { return resolution_; }
    const std::array<int, 3>& dims() const noexcept { return dims_; }
    double inflation_radius() const noexcept { return inflation_radius_; }
    std::size_t cell_count() const noexcept { return occupied_.size(); }

    bool in_bounds(const CellIndex& c) const noexcept;
    bool contains(const Vec3& p) const noexcept;
    /// Cell holding p (points on the upper face belong to the last cell).
    CellIndex cell_of(const Vec3& p) const;
    Vec3 center(const CellIndex& c) const;
    std::size_t linear(const CellIndex& c) const noexcept;
    CellIndex unlinear(std::size_t i) const noexcept;

    bool occupied(const CellIndex& c) const { return occupied_[linear(c)] != 0; }
    void set_occupied(const CellIndex& c, bool value = true) { occupied_[linear(c)] = value ? 1 : 0; }
    std::size_t occupied_count() const;

    /// Marks the cell containing p and every cell whose center is within
    /// inflation_radius of p.
    void mark_point(const Vec3& p);

private:
    Vec3 origin_;
    double resolution_;
    std::array<int, 3> dims_;
    double inflation_radius_;
    std::vector<std::uint8_t> occupied_;
};

struct PlanningConfig {
    double resolution = 0.05;
    double inflation_radius = 0.15;
    double bounds_margin = 0.5;
    double waypoint_stride = 1.0;
    double snap_radius = 0.5;

    void check() const;
};

OccupancyGrid build_occupancy(const SceneBundle& scene_ref, double resolution = 0.05,
                              double inflation_radius = 0.15, double bounds_margin = 0.5);

struct PlannedPath {
    Trajectory trajectory;  // start, cell centers, goal
    std::vector<CellIndex> cells;
    double cost = 0.0;      // sum of center-to-center steps on the grid graph
};

/// Nearest free cell to p within `radius` (distance from p to cell centers,
/// ties broken by lexicographic cell index). Returns p's own cell if free.
std::optional<CellIndex> snap_to_free(const OccupancyGrid& grid, const Vec3& p, double radius = 0.5);

/// 26-connected A* between the cells of start and goal. Occupied endpoint
/// cells are first snapped to the nearest free cell. Throws UnreachableError
/// when no snap cell or no path exists.
PlannedPath astar(const OccupancyGrid& grid, const Vec3& start, const Vec3& goal, double snap_radius = 0.5);

/// Point-by-point transfer through the map.
Trajectory transfer_short(const Trajectory& traj, const ThinPlateSpline& map);

/// Arc-length resampling that keeps both endpoints; consecutive samples are
/// at most `stride` apart along the polyline.
std::vector<Vec3> sample_waypoints(const Trajectory& traj, double stride);

struct LongTransfer {
    Trajectory trajectory;
    std::vector<Vec3> mapped_waypoints;  // after snapping
    std::vector<double> segment_costs;
};

/// Samples waypoints, maps them, snaps them out of collision and reconnects
/// consecutive ones with astar. Throws UnreachableError naming the failing
/// waypoint pair.
LongTransfer transfer_long(const Trajectory& traj, const ThinPlateSpline& map, const OccupancyGrid& grid,
                           double stride = 1.0, double snap_radius = 0.5);

}  // namespace scene_analogy
