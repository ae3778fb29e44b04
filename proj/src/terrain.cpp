#include "lzeval/terrain.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace lzeval {

std::string to_string(CellVerdict v) {
    switch (v) {
        case CellVerdict::Safe: return "safe";
        case CellVerdict::Unsafe: return "unsafe";
        case CellVerdict::Unknown: return "unknown";
    }
    return "unknown";
}

std::string to_string(DecisionReason r) {
    switch (r) {
        case DecisionReason::None: return "none";
        case DecisionReason::Slope: return "slope";
        case DecisionReason::Roughness: return "roughness";
        case DecisionReason::InsufficientData: return "insufficient_data";
    }
    return "none";
}

PointCloud build_point_cloud(const DisparityMap& d, const CameraIntrinsics& k,
                             const Vec3& up, double max_range) {
    k.validate();
    if (!(max_range > 0.0)) throw InputError("max_range must be positive");
    if (std::abs(up.norm() - 1.0) > 1e-6) throw InputError("up direction must be unit norm");

    const UnitQuaternion align = rotation_between(up, Vec3{0, 0, 1});
    PointCloud cloud;
    cloud.points.reserve(d.valid_count());
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            if (!d.is_valid(x, y)) continue;
            double disp = d.at(x, y);
            if (disp <= 1e-9) continue;
            double z = k.fx * k.baseline / disp;
            if (z > max_range) continue;
            Vec3 cam{(x - k.cx) * z / k.fx, (y - k.cy) * z / k.fy, z};
            cloud.points.push_back(rotate_vector(align, cam));
        }
    }
    return cloud;
}

namespace {

std::optional<CellStats> fit_cell(const Vec3* pts, const int* indices, int count) {
    Vec3 centroid{};
    for (int i = 0; i < count; ++i) centroid = centroid + pts[indices[i]];
    centroid = centroid * (1.0 / count);

    double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
    for (int i = 0; i < count; ++i) {
        Vec3 c = pts[indices[i]] - centroid;
        xx += c.x * c.x;
        xy += c.x * c.y;
        xz += c.x * c.z;
        yy += c.y * c.y;
        yz += c.y * c.z;
        zz += c.z * c.z;
    }
    double inv_n = 1.0 / count;
    Eigen::Matrix3d cov;
    cov << xx * inv_n, xy * inv_n, xz * inv_n,
           xy * inv_n, yy * inv_n, yz * inv_n,
           xz * inv_n, yz * inv_n, zz * inv_n;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Eigen::Vector3d n = eig.eigenvectors().col(0);  // smallest eigenvalue
    if (n.z() < 0.0) n = -n;

    CellStats stats;
    stats.normal = {n.x(), n.y(), n.z()};
    stats.slope_deg = std::acos(std::clamp(n.z(), -1.0, 1.0)) * 180.0 / M_PI;
    stats.roughness_m = std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
    stats.mean_height = centroid.z;
    stats.count = count;
    return stats;
}

GridMap bin_and_fit_impl(const PointCloud& cloud, double cell_size, int min_points,
                         bool parallel) {
    if (!(cell_size > 0.0)) throw InputError("cell_size must be positive");
    if (min_points < 3) throw InputError("min_points must be >= 3");

    GridMap grid;
    grid.cell_size = cell_size;

    if (cloud.empty()) {
        // Keep the nadir corner covered so the footprint is classifiable.
        grid.origin_x = -cell_size;
        grid.origin_y = -cell_size;
        grid.nx = 2;
        grid.ny = 2;
        grid.cells.assign(4, std::nullopt);
        grid.nadir_i = 1;
        grid.nadir_j = 1;
        return grid;
    }

    double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
    for (const Vec3& p : cloud.points) {
        if (!p.finite()) throw InputError("point cloud contains non-finite points");
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    // Origin on the cell lattice so the nadir (0,0) lands on a cell corner.
    grid.origin_x = cell_size * std::floor(min_x / cell_size);
    grid.origin_y = cell_size * std::floor(min_y / cell_size);
    grid.nx = static_cast<int>(std::floor((max_x - grid.origin_x) / cell_size)) + 1;
    grid.ny = static_cast<int>(std::floor((max_y - grid.origin_y) / cell_size)) + 1;
    grid.nadir_i = static_cast<int>(std::floor((0.0 - grid.origin_x) / cell_size));
    grid.nadir_j = static_cast<int>(std::floor((0.0 - grid.origin_y) / cell_size));
    grid.nadir_i = std::clamp(grid.nadir_i, 0, grid.nx - 1);
    grid.nadir_j = std::clamp(grid.nadir_j, 0, grid.ny - 1);

    const size_t n_cells = static_cast<size_t>(grid.nx) * grid.ny;
    grid.cells.assign(n_cells, std::nullopt);

    // Counting sort of point indices by cell, preserving cloud order.
    const int n_pts = static_cast<int>(cloud.size());
    std::vector<int> cell_of(n_pts);
    std::vector<int> counts(n_cells, 0);
    for (int i = 0; i < n_pts; ++i) {
        const Vec3& p = cloud.points[i];
        int ci = std::clamp(static_cast<int>(std::floor((p.x - grid.origin_x) / cell_size)),
                            0, grid.nx - 1);
        int cj = std::clamp(static_cast<int>(std::floor((p.y - grid.origin_y) / cell_size)),
                            0, grid.ny - 1);
        cell_of[i] = cj * grid.nx + ci;
        ++counts[cell_of[i]];
    }
    std::vector<int> offsets(n_cells + 1, 0);
    for (size_t c = 0; c < n_cells; ++c) offsets[c + 1] = offsets[c] + counts[c];
    std::vector<int> sorted(n_pts);
    std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
    for (int i = 0; i < n_pts; ++i) sorted[cursor[cell_of[i]]++] = i;

    const int64_t nc = static_cast<int64_t>(n_cells);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int64_t c = 0; c < nc; ++c) {
            int count = counts[c];
            if (count >= min_points) {
                grid.cells[c] = fit_cell(cloud.points.data(), sorted.data() + offsets[c], count);
            }
        }
    } else {
        for (int64_t c = 0; c < nc; ++c) {
            int count = counts[c];
            if (count >= min_points) {
                grid.cells[c] = fit_cell(cloud.points.data(), sorted.data() + offsets[c], count);
            }
        }
    }
    return grid;
}

}  // namespace

GridMap bin_and_fit(const PointCloud& cloud, double cell_size, int min_points) {
    return bin_and_fit_impl(cloud, cell_size, min_points, true);
}

GridMap bin_and_fit_serial(const PointCloud& cloud, double cell_size, int min_points) {
    return bin_and_fit_impl(cloud, cell_size, min_points, false);
}

LandingDecision classify_footprint(const GridMap& grid, double slope_max_deg,
                                   double rough_max_m, double footprint_m) {
    if (!(slope_max_deg > 0.0) || !(rough_max_m > 0.0)) {
        throw InputError("classification thresholds must be positive");
    }
    if (!(footprint_m >= grid.cell_size)) {
        throw InputError("footprint must be at least one cell wide");
    }

    LandingDecision dec;
    dec.nx = grid.nx;
    dec.ny = grid.ny;
    dec.cell_verdicts.resize(grid.cells.size());
    for (size_t c = 0; c < grid.cells.size(); ++c) {
        const auto& stats = grid.cells[c];
        if (!stats) {
            dec.cell_verdicts[c] = CellVerdict::Unknown;
        } else if (stats->slope_deg > slope_max_deg || stats->roughness_m > rough_max_m) {
            dec.cell_verdicts[c] = CellVerdict::Unsafe;
        } else {
            dec.cell_verdicts[c] = CellVerdict::Safe;
        }
    }

    const int k = static_cast<int>(std::ceil(footprint_m / grid.cell_size - 1e-9));
    const int i0 = grid.nadir_i - k / 2;
    const int j0 = grid.nadir_j - k / 2;

    dec.safe = true;
    dec.reason = DecisionReason::None;
    for (int j = j0; j < j0 + k; ++j) {
        for (int i = i0; i < i0 + k; ++i) {
            dec.footprint_cells.emplace_back(i, j);
            CellVerdict v = CellVerdict::Unknown;  // out-of-view cells stay unknown
            const CellStats* stats = nullptr;
            if (grid.in_bounds(i, j)) {
                v = dec.cell_verdicts[static_cast<size_t>(j) * grid.nx + i];
                if (grid.at(i, j)) stats = &*grid.at(i, j);
            }
            dec.footprint_verdicts.push_back(v);
            if (v == CellVerdict::Safe) continue;
            dec.safe = false;
            if (dec.reason == DecisionReason::None) {
                if (v == CellVerdict::Unknown) {
                    dec.reason = DecisionReason::InsufficientData;
                } else if (stats && stats->roughness_m > rough_max_m) {
                    dec.reason = DecisionReason::Roughness;
                } else {
                    dec.reason = DecisionReason::Slope;
                }
            }
        }
    }
    return dec;
}

ColorImage render_overlay(const GridMap& grid, const LandingDecision& decision,
                          int cell_px) {
    if (cell_px < 1) throw InputError("overlay cell size must be >= 1 px");
    if (decision.nx != grid.nx || decision.ny != grid.ny) {
        throw InputError("decision does not match the grid dimensions");
    }
    constexpr Rgb kGreen{0, 255, 0};
    constexpr Rgb kYellow{255, 255, 0};
    constexpr Rgb kBlue{0, 0, 255};
    constexpr Rgb kRed{255, 0, 0};
    constexpr Rgb kBlack{0, 0, 0};

    ColorImage img(grid.nx * cell_px, grid.ny * cell_px, kBlack);
    auto in_footprint = [&](int i, int j) {
        for (const auto& [fi, fj] : decision.footprint_cells) {
            if (fi == i && fj == j) return true;
        }
        return false;
    };
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            CellVerdict v = decision.cell_verdicts[static_cast<size_t>(j) * grid.nx + i];
            Rgb color;
            if (in_footprint(i, j)) {
                color = v == CellVerdict::Safe ? kGreen : kYellow;
            } else {
                color = v == CellVerdict::Safe ? kBlue
                        : v == CellVerdict::Unsafe ? kRed
                                                   : kBlack;
            }
            // Row 0 of the image shows the top of the grid (+y up).
            int py0 = (grid.ny - 1 - j) * cell_px;
            int px0 = i * cell_px;
            for (int py = py0; py < py0 + cell_px; ++py) {
                for (int px = px0; px < px0 + cell_px; ++px) {
                    img.at(px, py) = color;
                }
            }
        }
    }
    return img;
}

}  // namespace lzeval
