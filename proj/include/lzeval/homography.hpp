#pragma once

#include <array>
#include <cstdint>

#include "lzeval/optical_flow.hpp"

namespace lzeval {

/// 3x3 planar homography, scale-normalized: Frobenius norm 1 and h[2][2] >= 0.
struct Homography {
    std::array<double, 9> h{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major

    double operator()(int row, int col) const { return h[row * 3 + col]; }

    /// Scale-normalizes an arbitrary 3x3 matrix into a Homography.
    static Homography from_matrix(const std::array<double, 9>& m);

    /// Applies the homography with perspective division. Returns false when
    /// the homogeneous w of the result vanishes.
    bool map(const Vec2& p, Vec2& out) const;
};

/// Direct-linear-transform least-squares homography mapping (P+Q) -> P with
/// Hartley normalization of both point sets. Needs >= 4 valid non-collinear
/// correspondences, otherwise throws DegenerateError.
Homography fit_homography(const FlowField& flow);

/// Per-point RMS residual of the flow field against h:
/// sqrt(mean over valid points of |P - pi(H*(P+Q))|^2), pixels.
/// Points whose transform lands at w ~= 0 are excluded; more than 50%
/// exclusions raises DegenerateError.
double homography_error(const FlowField& flow, const Homography& h);

/// Low-pass-filtered planarity monitor state. `safe` holds exactly when the
/// filtered error is within the threshold.
struct PlanarityState {
    double raw_error = 0.0;       // latest residual e, px
    double filtered_error = 0.0;  // EMA of e, px
    double alpha = 0.9;           // EMA coefficient in [0, 1)
    double threshold = 1.0;       // px
    bool safe = true;
    int64_t samples = 0;          // updates folded in so far
};

/// EMA update: filtered <- alpha*filtered + (1-alpha)*e; the first sample
/// initializes filtered = e. Throws InputError on negative or non-finite e.
PlanarityState update_filter(const PlanarityState& state, double e);

struct MonoConfig {
    int stride = 20;
    int margin = 20;
    int pyramid_levels = 3;
    LkParams lk;
    double alpha = 0.9;
    double threshold = 1.0;  // px, on the filtered RMS error
};

/// One monocular monitor step over a frame pair: grid sampling, LK tracking,
/// homography fit, residual, filter update. A degenerate fit (textureless or
/// under-determined frame) feeds e = 2*threshold, treating the frame as
/// maximally unsafe.
PlanarityState mono_evaluate(const GrayImage& prev, const GrayImage& next,
                             const PlanarityState& state, const MonoConfig& config,
                             int* valid_points = nullptr);

}  // namespace lzeval
