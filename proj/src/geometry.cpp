#include "lzeval/geometry.hpp"

#include <algorithm>

namespace lzeval {

Vec3 Vec3::normalized() const {
    double n = norm();
    if (n < 1e-300) throw InputError("cannot normalize a zero vector");
    return {x / n, y / n, z / n};
}

UnitQuaternion UnitQuaternion::normalized(double w, double x, double y, double z) {
    double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (!(n > 1e-300) || !std::isfinite(n)) {
        throw InputError("cannot normalize a zero or non-finite quaternion");
    }
    return {w / n, x / n, y / n, z / n};
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle_rad) {
    Vec3 a = axis.normalized();
    double half = 0.5 * angle_rad;
    double s = std::sin(half);
    return normalized(std::cos(half), a.x * s, a.y * s, a.z * s);
}

UnitQuaternion quaternion_multiply(const UnitQuaternion& a, const UnitQuaternion& b) {
    return UnitQuaternion::normalized(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w);
}

Vec3 rotate_vector(const UnitQuaternion& q, const Vec3& v) {
    // q v q^-1 via t = 2 q_vec x v; v' = v + w t + q_vec x t
    Vec3 u{q.x, q.y, q.z};
    Vec3 t = u.cross(v) * 2.0;
    return v + t * q.w + u.cross(t);
}

UnitQuaternion rotation_between(const Vec3& from, const Vec3& to) {
    Vec3 f = from.normalized();
    Vec3 t = to.normalized();
    double c = std::clamp(f.dot(t), -1.0, 1.0);
    Vec3 axis = f.cross(t);
    double axis_norm = axis.norm();
    if (axis_norm < 1e-12) {
        if (c > 0.0) return UnitQuaternion::identity();
        // Antiparallel: choose any axis perpendicular to f, preferring x.
        Vec3 ortho = std::abs(f.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        Vec3 perp = (ortho - f * ortho.dot(f)).normalized();
        return UnitQuaternion{0.0, perp.x, perp.y, perp.z};
    }
    double angle = std::atan2(axis_norm, c);
    return UnitQuaternion::from_axis_angle(axis, angle);
}

double quaternion_angle(const UnitQuaternion& a, const UnitQuaternion& b) {
    double dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
    return 2.0 * std::acos(std::clamp(std::abs(dot), 0.0, 1.0));
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw InputError("focal lengths must be positive");
    if (!(baseline > 0.0)) throw InputError("stereo baseline must be positive");
    if (!std::isfinite(cx) || !std::isfinite(cy)) {
        throw InputError("principal point must be finite");
    }
}

void CameraIntrinsics::validate_for(int width, int height) const {
    validate();
    if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
        throw InputError("principal point outside the image");
    }
}

Vec3 disparity_to_point(double u, double v, double d, const CameraIntrinsics& k) {
    k.validate();
    if (!std::isfinite(d) || d <= 0.0) {
        throw InputError("disparity must be finite and positive");
    }
    double z = k.fx * k.baseline / d;
    return {(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
}

}  // namespace lzeval
