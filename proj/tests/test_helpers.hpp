#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// deliberately re-derive results with straight loops and their own linear
// algebra so they stay independent of the library implementation.

#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "lzeval/geometry.hpp"
#include "lzeval/homography.hpp"
#include "lzeval/image.hpp"
#include "lzeval/optical_flow.hpp"

namespace lzeval::testing {

/// Unique scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("lzeval_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
};

/// Component-wise quaternion distance up to the double-cover sign; avoids the
/// acos conditioning floor near zero angles.
inline double quat_component_dist(const UnitQuaternion& a, const UnitQuaternion& b) {
    double dplus = std::max({std::abs(a.w - b.w), std::abs(a.x - b.x), std::abs(a.y - b.y),
                             std::abs(a.z - b.z)});
    double dminus = std::max({std::abs(a.w + b.w), std::abs(a.x + b.x),
                              std::abs(a.y + b.y), std::abs(a.z + b.z)});
    return std::min(dplus, dminus);
}

/// 3x3 rotation matrix from a unit quaternion; the oracle for rotate_vector.
inline std::array<double, 9> quat_to_matrix(const UnitQuaternion& q) {
    double w = q.w, x = q.x, y = q.y, z = q.z;
    return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
            2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
            2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
}

inline Vec3 matrix_apply(const std::array<double, 9>& m, const Vec3& v) {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

/// Straight-loop evaluation of the flow-field residual
/// sqrt(mean |P - pi(H (P+Q))|^2) with its own matrix arithmetic.
inline double flow_residual_oracle(const FlowField& flow, const std::array<double, 9>& h) {
    double sum_sq = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < flow.points.size(); ++i) {
        if (!flow.valid[i]) continue;
        double sx = flow.points[i].x + flow.displacements[i].x;
        double sy = flow.points[i].y + flow.displacements[i].y;
        double hx = h[0] * sx + h[1] * sy + h[2];
        double hy = h[3] * sx + h[4] * sy + h[5];
        double hw = h[6] * sx + h[7] * sy + h[8];
        if (std::abs(hw) < 1e-12) continue;
        double ex = flow.points[i].x - hx / hw;
        double ey = flow.points[i].y - hy / hw;
        sum_sq += ex * ex + ey * ey;
        ++n;
    }
    return std::sqrt(sum_sq / static_cast<double>(n));
}

/// Cyclic-Jacobi eigendecomposition of a symmetric 3x3 matrix (ascending
/// eigenvalues); the oracle for the plane fits.
struct Eigen3Oracle {
    std::array<double, 3> values;
    std::array<std::array<double, 3>, 3> vectors;  // columns, vectors[k] = k-th
};

inline Eigen3Oracle jacobi_eigen3(std::array<double, 9> a) {
    std::array<double, 9> v{1, 0, 0, 0, 1, 0, 0, 0, 1};
    auto at = [](std::array<double, 9>& m, int r, int c) -> double& { return m[r * 3 + c]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(at(a, 0, 1)) + std::abs(at(a, 0, 2)) + std::abs(at(a, 1, 2));
        if (off < 1e-15) break;
        for (int p = 0; p < 3; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                double apq = at(a, p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    double akp = at(a, k, p), akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    double apk = at(a, p, k), aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    double vkp = at(v, k, p), vkq = at(v, k, q);
                    at(v, k, p) = c * vkp - s * vkq;
                    at(v, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::array<int, 3> order{0, 1, 2};
    std::array<double, 3> evals{a[0], a[4], a[8]};
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return evals[i] < evals[j]; });
    Eigen3Oracle out;
    for (int k = 0; k < 3; ++k) {
        out.values[k] = evals[order[k]];
        out.vectors[k] = {v[0 * 3 + order[k]], v[1 * 3 + order[k]], v[2 * 3 + order[k]]};
    }
    return out;
}

/// Plane statistics by the oracle route: covariance by straight loops, Jacobi
/// eigensolve, slope/roughness from the smallest eigenpair.
struct PlaneOracle {
    Vec3 normal;
    double slope_deg;
    double roughness_m;
};

inline PlaneOracle plane_fit_oracle(const std::vector<Vec3>& pts) {
    Vec3 c{};
    for (const Vec3& p : pts) c = c + p;
    c = c * (1.0 / pts.size());
    std::array<double, 9> cov{};
    for (const Vec3& p : pts) {
        Vec3 d = p - c;
        cov[0] += d.x * d.x;
        cov[1] += d.x * d.y;
        cov[2] += d.x * d.z;
        cov[4] += d.y * d.y;
        cov[5] += d.y * d.z;
        cov[8] += d.z * d.z;
    }
    cov[3] = cov[1];
    cov[6] = cov[2];
    cov[7] = cov[5];
    for (double& x : cov) x /= pts.size();
    Eigen3Oracle eig = jacobi_eigen3(cov);
    Vec3 n{eig.vectors[0][0], eig.vectors[0][1], eig.vectors[0][2]};
    if (n.z < 0) n = n * -1.0;
    PlaneOracle out;
    out.normal = n;
    out.slope_deg = std::acos(std::clamp(n.z, -1.0, 1.0)) * 180.0 / M_PI;
    out.roughness_m = std::sqrt(std::max(0.0, eig.values[0]));
    return out;
}

/// Deterministic textured image for shift tests (plain smoothed uniform
/// noise; independent of the simulator's value-noise texture).
inline GrayImage textured_image(int w, int h, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> uni(0.0f, 1.0f);
    GrayImage raw(w, h);
    for (float& v : raw.data) v = uni(rng);
    // 3x3 box smoothing keeps gradients finite at the pixel scale.
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    int sx = std::clamp(x + dx, 0, w - 1);
                    int sy = std::clamp(y + dy, 0, h - 1);
                    acc += raw.at(sx, sy);
                }
            }
            img.at(x, y) = acc / 9.0f;
        }
    }
    return img;
}

/// next(x, y) = prev(x - dx, y - dy); content moves by (+dx, +dy).
inline GrayImage shift_image(const GrayImage& img, int dx, int dy) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            int sx = std::clamp(x - dx, 0, img.width - 1);
            int sy = std::clamp(y - dy, 0, img.height - 1);
            out.at(x, y) = img.at(sx, sy);
        }
    }
    return out;
}

/// right(x, y) = left(x + s, y): a scene at constant disparity s.
inline GrayImage shift_right_view(const GrayImage& left, int s) {
    GrayImage out(left.width, left.height);
    for (int y = 0; y < left.height; ++y) {
        for (int x = 0; x < left.width; ++x) {
            int sx = std::min(x + s, left.width - 1);
            out.at(x, y) = left.at(sx, y);
        }
    }
    return out;
}

}  // namespace lzeval::testing
