#include "lzeval/homography.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace lzeval {

Homography Homography::from_matrix(const std::array<double, 9>& m) {
    double frob = 0.0;
    for (double v : m) frob += v * v;
    frob = std::sqrt(frob);
    if (!(frob > 1e-300) || !std::isfinite(frob)) {
        throw DegenerateError("homography matrix has zero or non-finite norm");
    }
    double sign = m[8] < 0.0 ? -1.0 : 1.0;
    Homography out;
    for (int i = 0; i < 9; ++i) out.h[i] = m[i] * sign / frob;
    return out;
}

bool Homography::map(const Vec2& p, Vec2& out) const {
    double w = h[6] * p.x + h[7] * p.y + h[8];
    if (std::abs(w) < 1e-12) return false;
    out.x = (h[0] * p.x + h[1] * p.y + h[2]) / w;
    out.y = (h[3] * p.x + h[4] * p.y + h[5]) / w;
    return true;
}

namespace {

struct Normalization {
    double cx = 0, cy = 0;  // centroid
    double s = 1;           // isotropic scale

    Vec2 apply(const Vec2& p) const { return {(p.x - cx) * s, (p.y - cy) * s}; }
};

// Hartley normalization: centroid to the origin, mean distance sqrt(2).
Normalization normalize_points(const std::vector<Vec2>& pts) {
    Normalization n;
    for (const Vec2& p : pts) {
        n.cx += p.x;
        n.cy += p.y;
    }
    n.cx /= pts.size();
    n.cy /= pts.size();
    double mean_dist = 0.0;
    for (const Vec2& p : pts) {
        mean_dist += std::hypot(p.x - n.cx, p.y - n.cy);
    }
    mean_dist /= pts.size();
    if (mean_dist < 1e-12) {
        throw DegenerateError("all correspondences coincide");
    }
    n.s = std::sqrt(2.0) / mean_dist;
    return n;
}

bool all_collinear(const std::vector<Vec2>& pts) {
    // Smallest eigenvalue of the 2x2 scatter matrix of centered points.
    double cx = 0, cy = 0;
    for (const Vec2& p : pts) {
        cx += p.x;
        cy += p.y;
    }
    cx /= pts.size();
    cy /= pts.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (const Vec2& p : pts) {
        double dx = p.x - cx, dy = p.y - cy;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    double trace = sxx + syy;
    double disc = std::sqrt((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy);
    double min_eig = 0.5 * (trace - disc);
    return min_eig <= 1e-10 * std::max(trace, 1.0);
}

Eigen::Matrix3d normalization_matrix(const Normalization& n) {
    Eigen::Matrix3d t;
    t << n.s, 0, -n.s * n.cx, 0, n.s, -n.s * n.cy, 0, 0, 1;
    return t;
}

}  // namespace

Homography fit_homography(const FlowField& flow) {
    if (flow.points.size() != flow.displacements.size() ||
        flow.points.size() != flow.valid.size()) {
        throw InputError("flow field arrays have mismatched lengths");
    }
    std::vector<Vec2> src, dst;  // src = P+Q (next frame), dst = P
    src.reserve(flow.size());
    dst.reserve(flow.size());
    for (size_t i = 0; i < flow.size(); ++i) {
        if (!flow.valid[i]) continue;
        src.push_back(flow.points[i] + flow.displacements[i]);
        dst.push_back(flow.points[i]);
    }
    if (src.size() < 4) {
        throw DegenerateError("homography fit needs at least 4 valid correspondences");
    }
    if (all_collinear(src) || all_collinear(dst)) {
        throw DegenerateError("valid correspondences are collinear");
    }

    Normalization ns = normalize_points(src);
    Normalization nd = normalize_points(dst);

    const int n = static_cast<int>(src.size());
    Eigen::MatrixXd a(2 * n, 9);
    for (int i = 0; i < n; ++i) {
        Vec2 s = ns.apply(src[i]);
        Vec2 d = nd.apply(dst[i]);
        a.row(2 * i) << 0, 0, 0, -s.x, -s.y, -1, d.y * s.x, d.y * s.y, d.y;
        a.row(2 * i + 1) << s.x, s.y, 1, 0, 0, 0, -d.x * s.x, -d.x * s.y, -d.x;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const auto& sing = svd.singularValues();
    // Two vanishing singular values mean the system does not pin down a
    // single homography (collinear or otherwise rank-deficient data).
    if (sing(7) <= 1e-12 * sing(0)) {
        throw DegenerateError("correspondences under-determine the homography");
    }
    Eigen::Matrix<double, 9, 1> hv = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);

    Eigen::Matrix3d h = normalization_matrix(nd).inverse() * hn * normalization_matrix(ns);
    if (std::abs(h.determinant()) < 1e-12 * std::pow(h.norm(), 3)) {
        throw DegenerateError("fitted homography is rank deficient");
    }
    return Homography::from_matrix(
        {h(0, 0), h(0, 1), h(0, 2), h(1, 0), h(1, 1), h(1, 2), h(2, 0), h(2, 1), h(2, 2)});
}

double homography_error(const FlowField& flow, const Homography& h) {
    size_t total_valid = 0;
    size_t included = 0;
    size_t excluded = 0;
    double sum_sq = 0.0;
    for (size_t i = 0; i < flow.size(); ++i) {
        if (!flow.valid[i]) continue;
        ++total_valid;
        Vec2 mapped;
        if (!h.map(flow.points[i] + flow.displacements[i], mapped)) {
            ++excluded;
            continue;
        }
        Vec2 r = flow.points[i] - mapped;
        sum_sq += r.x * r.x + r.y * r.y;
        ++included;
    }
    if (total_valid == 0) throw InputError("flow field has no valid points");
    if (2 * excluded > total_valid) {
        throw DegenerateError("homography maps most points to infinity");
    }
    return std::sqrt(sum_sq / static_cast<double>(included));
}

PlanarityState update_filter(const PlanarityState& state, double e) {
    if (!std::isfinite(e) || e < 0.0) {
        throw InputError("filter update needs a finite non-negative error");
    }
    PlanarityState out = state;
    out.raw_error = e;
    out.filtered_error =
        state.samples == 0 ? e : state.alpha * state.filtered_error + (1.0 - state.alpha) * e;
    out.samples = state.samples + 1;
    out.safe = out.filtered_error <= out.threshold;
    return out;
}

PlanarityState mono_evaluate(const GrayImage& prev, const GrayImage& next,
                             const PlanarityState& state, const MonoConfig& config,
                             int* valid_points) {
    if (!prev.same_size(next)) throw InputError("frame sizes differ");
    if (valid_points) *valid_points = 0;

    double e;
    try {
        std::vector<Vec2> pts =
            sample_grid(prev.width, prev.height, config.stride, config.margin);
        // Cap pyramid depth so the coarsest level keeps the 16x16 minimum.
        int levels = config.pyramid_levels;
        int min_dim = std::min(prev.width, prev.height);
        while (levels > 1 && (min_dim >> (levels - 1)) < 16) --levels;
        Pyramid pp = build_pyramid(prev, levels);
        Pyramid np = build_pyramid(next, levels);
        FlowField flow = track_points(pp, np, pts, config.lk);
        if (valid_points) *valid_points = static_cast<int>(flow.valid_count());
        Homography h = fit_homography(flow);
        e = homography_error(flow, h);
    } catch (const DegenerateError&) {
        // Textureless or under-determined frame: maximally unsafe.
        e = 2.0 * state.threshold;
    }
    return update_filter(state, e);
}

}  // namespace lzeval
