#include "scene_analogy/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace scene_analogy {

// ---------------------------------------------------------------------------
// Trajectory I/O

nlohmann::json trajectory_to_json(const Trajectory& traj) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : traj.points) pts.push_back({p.x(), p.y(), p.z()});
    return {{"frame_id", traj.frame_id}, {"points", pts}};
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("$", "trajectory must be a JSON object");
    Trajectory t;
    if (auto it = j.find("frame_id"); it != j.end()) {
        if (!it->is_string()) throw FormatError("frame_id", "expected a string");
        t.frame_id = it->get<std::string>();
    }
    auto it = j.find("points");
    if (it == j.end() || !it->is_array()) throw FormatError("points", "expected an array of [x, y, z]");
    for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& p = (*it)[i];
        const std::string where = "points[" + std::to_string(i) + "]";
        if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() || !p[2].is_number()) {
            throw FormatError(where, "expected [x, y, z]");
        }
        t.points.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
        if (!t.points.back().allFinite()) throw FormatError(where, "non-finite coordinate");
    }
    if (t.points.empty()) throw FormatError("points", "trajectory needs at least one point");
    return t;
}

Trajectory load_trajectory(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError(path.string(), "cannot open file");
    try {
        return trajectory_from_json(nlohmann::json::parse(is));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string(), e.what());
    }
}

// ---------------------------------------------------------------------------
// Occupancy grid

OccupancyGrid::OccupancyGrid(Vec3 origin, double resolution, std::array<int, 3> dims, double inflation_radius)
    : origin_(std::move(origin)), resolution_(resolution), dims_(dims), inflation_radius_(inflation_radius) {
    if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ArgumentError("grid resolution must be positive");
    if (!(inflation_radius >= 0.0) || !std::isfinite(inflation_radius)) {
        throw ArgumentError("inflation radius must be non-negative");
    }
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) throw ArgumentError("grid dimensions must be positive");
    occupied_.assign(static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
                         static_cast<std::size_t>(dims[2]),
                     0);
}

bool OccupancyGrid::in_bounds(const CellIndex& c) const noexcept {
    for (int a = 0; a < 3; ++a) {
        if (c[a] < 0 || c[a] >= dims_[a]) return false;
    }
    return true;
}

bool OccupancyGrid::contains(const Vec3& p) const noexcept {
    for (int a = 0; a < 3; ++a) {
        const double rel = p[a] - origin_[a];
        if (!(rel >= 0.0) || rel > dims_[a] * resolution_) return false;
    }
    return true;
}

CellIndex OccupancyGrid::cell_of(const Vec3& p) const {
    CellIndex c{};
    for (int a = 0; a < 3; ++a) {
        const auto i = static_cast<int>(std::floor((p[a] - origin_[a]) / resolution_));
        c[a] = (i == dims_[a] && p[a] - origin_[a] <= dims_[a] * resolution_) ? dims_[a] - 1 : i;
    }
    return c;
}

Vec3 OccupancyGrid::center(const CellIndex& c) const {
    return {origin_.x() + (c[0] + 0.5) * resolution_, origin_.y() + (c[1] + 0.5) * resolution_,
            origin_.z() + (c[2] + 0.5) * resolution_};
}

std::size_t OccupancyGrid::linear(const CellIndex& c) const noexcept {
    return (static_cast<std::size_t>(c[0]) * static_cast<std::size_t>(dims_[1]) + static_cast<std::size_t>(c[1])) *
               static_cast<std::size_t>(dims_[2]) +
           static_cast<std::size_t>(c[2]);
}

CellIndex OccupancyGrid::unlinear(std::size_t i) const noexcept {
    const auto nz = static_cast<std::size_t>(dims_[2]);
    const auto ny = static_cast<std::size_t>(dims_[1]);
    return {static_cast<int>(i / (ny * nz)), static_cast<int>((i / nz) % ny), static_cast<int>(i % nz)};
}

std::size_t OccupancyGrid::occupied_count() const {
    return static_cast<std::size_t>(std::count(occupied_.begin(), occupied_.end(), std::uint8_t{1}));
}

void OccupancyGrid::mark_point(const Vec3& p) {
    const auto own = cell_of(p);
    if (in_bounds(own)) set_occupied(own);
    const double r = inflation_radius_;
    if (r <= 0.0) return;
    CellIndex lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor((p[a] - r - origin_[a]) / resolution_ - 0.5)));
        hi[a] = std::min(dims_[a] - 1, static_cast<int>(std::ceil((p[a] + r - origin_[a]) / resolution_ - 0.5)));
    }
    for (int x = lo[0]; x <= hi[0]; ++x) {
        for (int y = lo[1]; y <= hi[1]; ++y) {
            for (int z = lo[2]; z <= hi[2]; ++z) {
                const CellIndex c{x, y, z};
                if ((center(c) - p).norm() <= r) set_occupied(c);
            }
        }
    }
}

void PlanningConfig::check() const {
    if (!(resolution > 0.0)) throw ArgumentError("planning resolution must be positive");
    if (!(inflation_radius >= 0.0)) throw ArgumentError("inflation radius must be non-negative");
    if (!(bounds_margin >= 0.0)) throw ArgumentError("bounds margin must be non-negative");
    if (!(waypoint_stride > 0.0)) throw ArgumentError("waypoint stride must be positive");
    if (!(snap_radius >= 0.0)) throw ArgumentError("snap radius must be non-negative");
}

OccupancyGrid build_occupancy(const SceneBundle& scene_ref, double resolution, double inflation_radius,
                              double bounds_margin) {
    if (scene_ref.total_points() == 0) throw ArgumentError("cannot build occupancy for an empty scene");
    if (!(resolution > 0.0)) throw ArgumentError("grid resolution must be positive");
    if (!(inflation_radius >= 0.0)) throw ArgumentError("inflation radius must be non-negative");
    if (!(bounds_margin >= 0.0)) throw ArgumentError("bounds margin must be non-negative");

    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& o : scene_ref.objects) {
        for (const auto& p : o.points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
    }
    lo.array() -= bounds_margin;
    hi.array() += bounds_margin;
    std::array<int, 3> dims{};
    for (int a = 0; a < 3; ++a) {
        dims[a] = std::max(1, static_cast<int>(std::ceil((hi[a] - lo[a]) / resolution)));
    }
    OccupancyGrid grid(lo, resolution, dims, inflation_radius);
    for (const auto& o : scene_ref.objects) {
        for (const auto& p : o.points) grid.mark_point(p);
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Planning

std::optional<CellIndex> snap_to_free(const OccupancyGrid& grid, const Vec3& p, double radius) {
    const auto own = grid.cell_of(p);
    if (grid.in_bounds(own) && !grid.occupied(own)) return own;

    const double res = grid.resolution();
    CellIndex lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor((p[a] - radius - grid.origin()[a]) / res - 0.5)));
        hi[a] = std::min(grid.dims()[a] - 1, static_cast<int>(std::ceil((p[a] + radius - grid.origin()[a]) / res - 0.5)));
    }
    std::optional<CellIndex> best;
    double best_dist = std::numeric_limits<double>::infinity();
    // Lexicographic scan order with strict improvement gives the index tie-break.
    for (int x = lo[0]; x <= hi[0]; ++x) {
        for (int y = lo[1]; y <= hi[1]; ++y) {
            for (int z = lo[2]; z <= hi[2]; ++z) {
                const CellIndex c{x, y, z};
                if (grid.occupied(c)) continue;
                const double d = (grid.center(c) - p).norm();
                if (d <= radius && d < best_dist) {
                    best_dist = d;
                    best = c;
                }
            }
        }
    }
    return best;
}

namespace {

struct Step {
    CellIndex offset;
    double cost;
};

std::vector<Step> neighbor_steps(double resolution) {
    std::vector<Step> steps;
    for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dz = -1; dz <= 1; ++dz) {
                const int n2 = dx * dx + dy * dy + dz * dz;
                if (n2 == 0) continue;
                steps.push_back({{dx, dy, dz}, resolution * std::sqrt(static_cast<double>(n2))});
            }
        }
    }
    return steps;
}

void append_unique(std::vector<Vec3>& pts, const Vec3& p) {
    if (pts.empty() || pts.back() != p) pts.push_back(p);
}

std::string fmt_point(const Vec3& p) {
    std::ostringstream os;
    os << '(' << p.x() << ", " << p.y() << ", " << p.z() << ')';
    return os.str();
}

}  // namespace

PlannedPath astar(const OccupancyGrid& grid, const Vec3& start, const Vec3& goal, double snap_radius) {
    if (!grid.contains(start) || !grid.contains(goal)) {
        throw ArgumentError("astar start and goal must lie inside the grid");
    }
    const auto s = snap_to_free(grid, start, snap_radius);
    if (!s) throw UnreachableError("no free cell within snap radius of start " + fmt_point(start));
    const auto g = snap_to_free(grid, goal, snap_radius);
    if (!g) throw UnreachableError("no free cell within snap radius of goal " + fmt_point(goal));

    const auto steps = neighbor_steps(grid.resolution());
    const Vec3 goal_center = grid.center(*g);
    // Shrunk slightly so rounding in the straight-line distance never
    // overestimates a summed grid path.
    constexpr double kHeuristicScale = 1.0 - 1e-12;
    auto heuristic = [&](const CellIndex& c) { return kHeuristicScale * (grid.center(c) - goal_center).norm(); };

    const auto n = grid.cell_count();
    std::vector<double> gscore(n, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> parent(n, -1);
    using Entry = std::pair<double, std::size_t>;  // (f, linear index)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::vector<double> fscore(n, std::numeric_limits<double>::infinity());

    const auto si = grid.linear(*s);
    const auto gi = grid.linear(*g);
    gscore[si] = 0.0;
    fscore[si] = heuristic(*s);
    open.emplace(fscore[si], si);
    bool found = false;
    while (!open.empty()) {
        const auto [f, u] = open.top();
        open.pop();
        if (f != fscore[u]) continue;  // stale entry
        if (u == gi) {
            found = true;
            break;
        }
        const auto cu = grid.unlinear(u);
        for (const auto& st : steps) {
            const CellIndex cv{cu[0] + st.offset[0], cu[1] + st.offset[1], cu[2] + st.offset[2]};
            if (!grid.in_bounds(cv) || grid.occupied(cv)) continue;
            const auto v = grid.linear(cv);
            const double tentative = gscore[u] + st.cost;
            if (tentative < gscore[v]) {
                gscore[v] = tentative;
                parent[v] = static_cast<std::int64_t>(u);
                fscore[v] = tentative + heuristic(cv);
                open.emplace(fscore[v], v);
            }
        }
    }
    if (!found) {
        throw UnreachableError("no path from " + fmt_point(start) + " to " + fmt_point(goal));
    }

    PlannedPath path;
    path.cost = gscore[gi];
    for (auto v = static_cast<std::int64_t>(gi); v >= 0; v = parent[static_cast<std::size_t>(v)]) {
        path.cells.push_back(grid.unlinear(static_cast<std::size_t>(v)));
    }
    std::reverse(path.cells.begin(), path.cells.end());
    append_unique(path.trajectory.points, start);
    for (const auto& c : path.cells) append_unique(path.trajectory.points, grid.center(c));
    append_unique(path.trajectory.points, goal);
    return path;
}

// ---------------------------------------------------------------------------
// Transfer

Trajectory transfer_short(const Trajectory& traj, const ThinPlateSpline& map) {
    Trajectory out;
    out.frame_id = traj.frame_id;
    out.points = map.apply(traj.points);
    return out;
}

std::vector<Vec3> sample_waypoints(const Trajectory& traj, double stride) {
    if (!(stride > 0.0)) throw ArgumentError("waypoint stride must be positive");
    if (traj.points.empty()) throw ArgumentError("trajectory is empty");
    std::vector<Vec3> out{traj.points.front()};
    double next = stride;  // arc length of the next sample
    double walked = 0.0;   // arc length at the start of the current segment
    for (std::size_t i = 1; i < traj.points.size(); ++i) {
        const Vec3& a = traj.points[i - 1];
        const Vec3& b = traj.points[i];
        const double len = (b - a).norm();
        while (len > 0.0 && next < walked + len) {
            out.push_back(a + (next - walked) / len * (b - a));
            next += stride;
        }
        walked += len;
    }
    if (traj.points.size() > 1) out.push_back(traj.points.back());
    return out;
}

LongTransfer transfer_long(const Trajectory& traj, const ThinPlateSpline& map, const OccupancyGrid& grid,
                           double stride, double snap_radius) {
    if (traj.points.size() < 2) throw ArgumentError("long transfer needs at least two trajectory points");
    const auto waypoints = sample_waypoints(traj, stride);

    LongTransfer out;
    out.trajectory.frame_id = traj.frame_id;
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
        const Vec3 mapped = map.apply(waypoints[i]);
        if (!grid.contains(mapped)) {
            throw UnreachableError("waypoint " + std::to_string(i) + " maps to " + fmt_point(mapped) +
                                   ", outside the planning grid");
        }
        const auto cell = snap_to_free(grid, mapped, snap_radius);
        if (!cell) {
            throw UnreachableError("waypoint " + std::to_string(i) + " maps into collision at " + fmt_point(mapped) +
                                   " with no free cell within " + std::to_string(snap_radius) + " m");
        }
        out.mapped_waypoints.push_back(*cell == grid.cell_of(mapped) ? mapped : grid.center(*cell));
    }

    for (std::size_t i = 0; i + 1 < out.mapped_waypoints.size(); ++i) {
        PlannedPath seg;
        try {
            seg = astar(grid, out.mapped_waypoints[i], out.mapped_waypoints[i + 1], snap_radius);
        } catch (const UnreachableError& e) {
            throw UnreachableError("segment between waypoints " + std::to_string(i) + " and " +
                                   std::to_string(i + 1) + " is unreachable: " + e.what());
        }
        out.segment_costs.push_back(seg.cost);
        for (const auto& p : seg.trajectory.points) append_unique(out.trajectory.points, p);
    }
    if (out.trajectory.points.empty()) out.trajectory.points = out.mapped_waypoints;
    return out;
}

}  // namespace scene_analogy
