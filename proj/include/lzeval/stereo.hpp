#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lzeval/image.hpp"

namespace lzeval {

/// Per-pixel horizontal disparity, sub-pixel, left-referenced unless noted.
/// +infinity marks an invalid pixel.
struct DisparityMap {
    int width = 0;
    int height = 0;
    std::vector<float> d;
    uint64_t params_hash = 0;

    static constexpr float kInvalid = std::numeric_limits<float>::infinity();

    DisparityMap() = default;
    DisparityMap(int w, int h, uint64_t hash = 0)
        : width(w), height(h), d(static_cast<size_t>(w) * h, kInvalid), params_hash(hash) {}

    float at(int x, int y) const { return d[static_cast<size_t>(y) * width + x]; }
    float& at(int x, int y) { return d[static_cast<size_t>(y) * width + x]; }
    bool is_valid(int x, int y) const { return std::isfinite(at(x, y)); }
    size_t valid_count() const;
    bool same_size(const DisparityMap& o) const {
        return width == o.width && height == o.height;
    }
    bool operator==(const DisparityMap&) const = default;
};

struct BlockMatchParams {
    int block = 11;                   // odd, >= 5
    int min_disp = 0;                 // >= 0
    int max_disp = 64;                // > min_disp
    double texture_threshold = 1e-4;  // block intensity variance on [0,1]
    double uniqueness_ratio = 1.15;   // >= 1
    double lr_tolerance = 1.0;        // px

    void validate() const;
    uint64_t hash() const;
};

/// SAD block matcher over a rectified pair: per pixel, the disparity in
/// [min_disp, max_disp] minimizing the block SAD along the row, with
/// parabolic sub-pixel refinement (clamped to +/-0.5 px). Pixels fail on low
/// block variance, a non-unique minimum (best*ratio >= second best outside
/// +/-1 of the winner), or a search window leaving either image.
/// Intensities are quantized to 8 bits internally so costs are exact
/// integers; output is bit-identical for any thread count.
DisparityMap compute_disparity(const GrayImage& left, const GrayImage& right,
                               const BlockMatchParams& p);

/// Brute-force serial reference matcher: same contract and bit-identical
/// output as compute_disparity, straight per-pixel SAD loops. Kept for
/// equivalence tests and the benchmark.
DisparityMap compute_disparity_reference(const GrayImage& left, const GrayImage& right,
                                         const BlockMatchParams& p);

/// Right-referenced disparity from the same pair (search direction mirrored),
/// for the left-right consistency check.
DisparityMap compute_right_disparity(const GrayImage& left, const GrayImage& right,
                                     const BlockMatchParams& p);

/// Invalidates left-map pixels whose right-map counterpart disagrees by more
/// than tol px or is missing. Never validates a pixel.
DisparityMap left_right_check(const DisparityMap& d_left, const DisparityMap& d_right,
                              double tol);

/// Percentage of ground-truth-valid pixels whose estimate is missing or errs
/// by more than tau px. Invalid estimates at valid-gt pixels count as bad.
double bad_pixel_rate(const DisparityMap& est, const DisparityMap& gt, double tau);

}  // namespace lzeval
