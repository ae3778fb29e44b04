#pragma once

#include <cstdint>
#include <vector>

#include "lzeval/geometry.hpp"
#include "lzeval/image.hpp"

namespace lzeval {

/// Sampled flow field: points P with displacements Q and per-point validity.
/// Invalid points always carry a (0, 0) displacement.
struct FlowField {
    std::vector<Vec2> points;
    std::vector<Vec2> displacements;
    std::vector<uint8_t> valid;
    int frame_width = 0;
    int frame_height = 0;

    size_t size() const { return points.size(); }
    size_t valid_count() const;
    bool operator==(const FlowField&) const = default;
};

/// Image pyramid; level 0 is full resolution, each level halves (floor) the
/// previous one via 2x2 box averaging.
struct Pyramid {
    std::vector<GrayImage> levels;

    int level_count() const { return static_cast<int>(levels.size()); }
    const GrayImage& base() const { return levels.front(); }
};

/// Builds `levels` pyramid levels; the coarsest must stay at least 16x16.
Pyramid build_pyramid(const GrayImage& img, int levels);

/// Regular sampling grid with the given stride, offset by `margin` from every
/// border, row-major. Throws DegenerateError when fewer than a 2x2 grid fits.
std::vector<Vec2> sample_grid(int width, int height, int stride, int margin);

struct LkParams {
    int window = 21;        // odd, >= 5
    int max_iters = 30;
    double eps = 0.01;      // convergence threshold on the update step, px
    double min_eig = 1e-4;  // min structure-tensor eigenvalue per window pixel
};

/// Pyramidal Lucas-Kanade point tracker, coarse to fine, bilinear sub-pixel
/// sampling. A point is invalid when the structure tensor is too weak, the
/// iteration leaves the frame, or the update fails to converge.
/// Per-point work runs OpenMP-parallel; results do not depend on the thread
/// count.
FlowField track_points(const Pyramid& prev, const Pyramid& next,
                       const std::vector<Vec2>& points, const LkParams& params);

/// Serial reference implementation of track_points; bit-identical output.
FlowField track_points_serial(const Pyramid& prev, const Pyramid& next,
                              const std::vector<Vec2>& points, const LkParams& params);

}  // namespace lzeval
