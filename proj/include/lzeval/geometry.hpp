#pragma once

#include <cmath>

#include "lzeval/error.hpp"

namespace lzeval {

inline constexpr double kGravity = 9.80665;  // m/s^2

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::sqrt(x * x + y * y); }
    bool operator==(const Vec2&) const = default;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const;
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
    bool operator==(const Vec3&) const = default;
};

/// Unit quaternion, Hamilton convention, (w, x, y, z).
struct UnitQuaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    static UnitQuaternion identity() { return {}; }

    /// Normalizes the given components; throws InputError on a near-zero norm.
    static UnitQuaternion normalized(double w, double x, double y, double z);

    /// Axis need not be unit length; throws on a near-zero axis.
    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle_rad);

    UnitQuaternion conjugate() const { return {w, -x, -y, -z}; }
    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
};

/// Hamilton product a*b, re-normalized.
UnitQuaternion quaternion_multiply(const UnitQuaternion& a, const UnitQuaternion& b);

/// Rotates v by q (computes q v q^-1).
Vec3 rotate_vector(const UnitQuaternion& q, const Vec3& v);

/// Minimal-arc rotation taking direction `from` onto direction `to`.
/// Antiparallel inputs rotate 180 degrees about a fixed perpendicular axis.
UnitQuaternion rotation_between(const Vec3& from, const Vec3& to);

/// Rotation angle between two unit quaternions, radians in [0, pi].
double quaternion_angle(const UnitQuaternion& a, const UnitQuaternion& b);

/// Pinhole camera with a horizontal stereo baseline. Frame convention:
/// x right, y down, z forward along the optical axis.
struct CameraIntrinsics {
    double fx = 400.0;
    double fy = 400.0;
    double cx = 319.5;
    double cy = 239.5;
    double baseline = 0.12;  // meters

    void validate() const;
    /// Checks the principal point against an image size it is bound to.
    void validate_for(int width, int height) const;
};

/// Unprojects pixel (u, v) with disparity d into the camera frame.
/// Z = fx*baseline/d, X = (u-cx)*Z/fx, Y = (v-cy)*Z/fy.
Vec3 disparity_to_point(double u, double v, double d, const CameraIntrinsics& k);

}  // namespace lzeval
