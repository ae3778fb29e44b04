#include "lzeval/optical_flow.hpp"

#include <algorithm>
#include <cmath>

namespace lzeval {

size_t FlowField::valid_count() const {
    size_t n = 0;
    for (uint8_t v : valid) n += v ? 1 : 0;
    return n;
}

Pyramid build_pyramid(const GrayImage& img, int levels) {
    if (levels < 1) throw InputError("pyramid needs at least one level");
    int w = img.width, h = img.height;
    for (int k = 1; k < levels; ++k) {
        w /= 2;
        h /= 2;
    }
    if (w < 16 || h < 16) {
        throw InputError("image too small for requested pyramid levels");
    }
    Pyramid pyr;
    pyr.levels.reserve(levels);
    pyr.levels.push_back(img);
    for (int k = 1; k < levels; ++k) {
        const GrayImage& prev = pyr.levels.back();
        GrayImage next(prev.width / 2, prev.height / 2);
        for (int y = 0; y < next.height; ++y) {
            for (int x = 0; x < next.width; ++x) {
                next.at(x, y) = 0.25f * (prev.at(2 * x, 2 * y) + prev.at(2 * x + 1, 2 * y) +
                                         prev.at(2 * x, 2 * y + 1) + prev.at(2 * x + 1, 2 * y + 1));
            }
        }
        pyr.levels.push_back(std::move(next));
    }
    return pyr;
}

std::vector<Vec2> sample_grid(int width, int height, int stride, int margin) {
    if (stride < 1) throw InputError("grid stride must be >= 1");
    if (margin < 0) throw InputError("grid margin must be >= 0");
    int nx = 0, ny = 0;
    for (int x = margin; x <= width - margin; x += stride) ++nx;
    for (int y = margin; y <= height - margin; y += stride) ++ny;
    if (nx < 2 || ny < 2) {
        throw DegenerateError("sampling grid degenerate: need at least 2x2 points");
    }
    std::vector<Vec2> pts;
    pts.reserve(static_cast<size_t>(nx) * ny);
    for (int y = margin; y <= height - margin; y += stride) {
        for (int x = margin; x <= width - margin; x += stride) {
            pts.push_back({static_cast<double>(x), static_cast<double>(y)});
        }
    }
    return pts;
}

namespace {

// Window center placement rule: a window may overhang each border by at most
// half its radius.
bool window_ok(double cx, double cy, int w, int h, double half) {
    double lim = 0.5 * half;
    return cx >= half - lim && cx <= (w - 1) - half + lim && cy >= half - lim &&
           cy <= (h - 1) - half + lim;
}

struct TrackResult {
    Vec2 flow;
    bool valid = false;
};

TrackResult track_one(const Pyramid& prev, const Pyramid& next, const Vec2& p,
                      const LkParams& prm) {
    const int top = prev.level_count() - 1;
    const int hw = prm.window / 2;
    const int win_px = prm.window * prm.window;
    const double half = hw;

    const GrayImage& base = prev.base();
    if (p.x < 0 || p.y < 0 || p.x >= base.width || p.y >= base.height) return {};

    std::vector<double> tmpl(win_px), gx(win_px), gy(win_px);
    Vec2 g{0, 0};  // accumulated guess, in current-level pixels

    for (int level = top; level >= 0; --level) {
        const GrayImage& I = prev.levels[level];
        const GrayImage& J = next.levels[level];
        const double scale = 1.0 / static_cast<double>(1 << level);
        const Vec2 pl{p.x * scale, p.y * scale};

        if (!window_ok(pl.x, pl.y, I.width, I.height, half)) return {};

        // Template intensities and gradients around pl, and the 2x2 structure
        // tensor (computed once per level).
        double a11 = 0, a12 = 0, a22 = 0;
        int idx = 0;
        for (int dy = -hw; dy <= hw; ++dy) {
            for (int dx = -hw; dx <= hw; ++dx, ++idx) {
                double sx = pl.x + dx;
                double sy = pl.y + dy;
                tmpl[idx] = sample_bilinear(I, sx, sy);
                double ix = 0.5 * (sample_bilinear(I, sx + 1, sy) - sample_bilinear(I, sx - 1, sy));
                double iy = 0.5 * (sample_bilinear(I, sx, sy + 1) - sample_bilinear(I, sx, sy - 1));
                gx[idx] = ix;
                gy[idx] = iy;
                a11 += ix * ix;
                a12 += ix * iy;
                a22 += iy * iy;
            }
        }
        double trace = a11 + a22;
        double disc = std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12);
        double min_eig = 0.5 * (trace - disc) / win_px;
        if (min_eig < prm.min_eig) return {};
        double det = a11 * a22 - a12 * a12;
        if (det <= 0.0) return {};

        Vec2 nu{0, 0};
        bool converged = false;
        for (int iter = 0; iter < prm.max_iters; ++iter) {
            Vec2 pos = pl + g + nu;
            if (!window_ok(pos.x, pos.y, J.width, J.height, half)) return {};
            double b1 = 0, b2 = 0;
            idx = 0;
            for (int dy = -hw; dy <= hw; ++dy) {
                for (int dx = -hw; dx <= hw; ++dx, ++idx) {
                    double diff = tmpl[idx] - sample_bilinear(J, pos.x + dx, pos.y + dy);
                    b1 += diff * gx[idx];
                    b2 += diff * gy[idx];
                }
            }
            Vec2 delta{(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
            nu = nu + delta;
            if (delta.norm() < prm.eps) {
                converged = true;
                break;
            }
        }
        if (!converged) return {};

        g = g + nu;
        if (level > 0) g = g * 2.0;
    }
    return {g, true};
}

FlowField track_impl(const Pyramid& prev, const Pyramid& next,
                     const std::vector<Vec2>& points, const LkParams& prm,
                     bool parallel) {
    if (prm.window < 5 || prm.window % 2 == 0) {
        throw InputError("LK window must be odd and >= 5");
    }
    if (prm.max_iters < 1 || !(prm.eps > 0.0)) throw InputError("bad LK iteration limits");
    if (prev.level_count() != next.level_count() || prev.levels.empty()) {
        throw InputError("pyramids have mismatched level counts");
    }
    for (int k = 0; k < prev.level_count(); ++k) {
        if (!prev.levels[k].same_size(next.levels[k])) {
            throw InputError("pyramids built from different frame sizes");
        }
    }

    const int n = static_cast<int>(points.size());
    FlowField out;
    out.frame_width = prev.base().width;
    out.frame_height = prev.base().height;
    out.points = points;
    out.displacements.assign(points.size(), Vec2{});
    out.valid.assign(points.size(), 0);

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            TrackResult r = track_one(prev, next, points[i], prm);
            out.displacements[i] = r.valid ? r.flow : Vec2{};
            out.valid[i] = r.valid ? 1 : 0;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            TrackResult r = track_one(prev, next, points[i], prm);
            out.displacements[i] = r.valid ? r.flow : Vec2{};
            out.valid[i] = r.valid ? 1 : 0;
        }
    }
    return out;
}

}  // namespace

FlowField track_points(const Pyramid& prev, const Pyramid& next,
                       const std::vector<Vec2>& points, const LkParams& params) {
    return track_impl(prev, next, points, params, true);
}

FlowField track_points_serial(const Pyramid& prev, const Pyramid& next,
                              const std::vector<Vec2>& points, const LkParams& params) {
    return track_impl(prev, next, points, params, false);
}

}  // namespace lzeval
