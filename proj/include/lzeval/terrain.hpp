#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lzeval/geometry.hpp"
#include "lzeval/image.hpp"
#include "lzeval/stereo.hpp"

namespace lzeval {

/// Points in the gravity-aligned frame (z up), meters. The camera sits at the
/// origin, so ground below the vehicle has negative z.
struct PointCloud {
    std::vector<Vec3> points;

    size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Least-squares plane statistics of one grid cell.
struct CellStats {
    Vec3 normal;             // unit, oriented z >= 0
    double slope_deg = 0.0;  // angle between normal and +z, [0, 90]
    double roughness_m = 0.0;  // RMS orthogonal plane residual
    double mean_height = 0.0;  // centroid z, meters
    int count = 0;
};

/// Gravity-aligned 2D grid of cells. Cell (i, j) covers
/// [origin_x + i*cell, origin_x + (i+1)*cell) x [origin_y + j*cell, ...).
/// The origin is a multiple of cell_size, so the nadir point (0, 0) always
/// falls on a cell corner.
struct GridMap {
    double cell_size = 0.5;
    double origin_x = 0.0;
    double origin_y = 0.0;
    int nx = 0;
    int ny = 0;
    std::vector<std::optional<CellStats>> cells;  // row-major: j*nx + i
    int nadir_i = 0;
    int nadir_j = 0;

    const std::optional<CellStats>& at(int i, int j) const {
        return cells[static_cast<size_t>(j) * nx + i];
    }
    std::optional<CellStats>& at(int i, int j) {
        return cells[static_cast<size_t>(j) * nx + i];
    }
    bool in_bounds(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
};

enum class CellVerdict { Safe, Unsafe, Unknown };
enum class DecisionReason { None, Slope, Roughness, InsufficientData };

std::string to_string(CellVerdict v);
std::string to_string(DecisionReason r);

/// Boolean landing command plus the per-cell classification behind it.
/// `safe` holds exactly when every footprint cell verdict is Safe; unknown
/// cells inside the footprint therefore force an abort.
struct LandingDecision {
    bool safe = false;
    std::vector<std::pair<int, int>> footprint_cells;   // (i, j), may exceed grid
    std::vector<CellVerdict> footprint_verdicts;        // aligned with footprint_cells
    DecisionReason reason = DecisionReason::None;
    // Threshold classification of every grid cell (row-major j*nx + i), for
    // the overlay and the JSON report.
    std::vector<CellVerdict> cell_verdicts;
    int nx = 0;
    int ny = 0;
};

/// Unprojects every valid disparity, rotates by the minimal rotation taking
/// the camera frame's measured up direction onto +z, and drops points deeper
/// than max_range along the camera axis. Row-major point order.
PointCloud build_point_cloud(const DisparityMap& d, const CameraIntrinsics& k,
                             const Vec3& up, double max_range);

/// Bins points into cell_size cells (nadir on a cell corner, bounding box
/// covered) and fits a least-squares plane per cell with count >= min_points:
/// smallest covariance eigenvector as the normal (oriented z >= 0), slope from
/// the normal, roughness as the RMS orthogonal residual. Cell fits run
/// OpenMP-parallel; results do not depend on the thread count.
GridMap bin_and_fit(const PointCloud& cloud, double cell_size, int min_points);

/// Serial reference implementation of bin_and_fit; bit-identical output.
GridMap bin_and_fit_serial(const PointCloud& cloud, double cell_size, int min_points);

/// Classifies the ceil(footprint/cell)^2 block of cells centered on the nadir
/// against the slope/roughness thresholds. Cells without stats (or outside
/// the grid) are Unknown and unsafe. The reason reports the first failing
/// criterion scanning the footprint row-major.
LandingDecision classify_footprint(const GridMap& grid, double slope_max_deg,
                                   double rough_max_m, double footprint_m);

/// Colored cell map: footprint cells green (safe) / yellow (unsafe or
/// unknown); outside cells blue (safe) / red (unsafe) / black (no data).
/// Each cell becomes a cell_px x cell_px block; image rows run from the
/// grid's top (j = ny-1) down so +y points up in the picture.
ColorImage render_overlay(const GridMap& grid, const LandingDecision& decision,
                          int cell_px);

}  // namespace lzeval
