#pragma once

#include <filesystem>
#include <vector>

#include "lzeval/geometry.hpp"

namespace lzeval {

/// One gyro+accelerometer reading in the body frame. accel is specific force:
/// a static, level sensor reads +g along body z-up.
struct ImuSample {
    Vec3 gyro;    // rad/s
    Vec3 accel;   // m/s^2
    double dt = 0.0;  // seconds since the previous sample, > 0
};

/// Madgwick filter state: body-to-world orientation plus gradient step size.
struct OrientationState {
    UnitQuaternion q;
    double beta = 0.1;
};

/// Accelerometer trust band: the gravity-alignment gradient is applied only
/// when the accel norm falls inside (0.5 g, 1.5 g); otherwise the step
/// integrates the gyro alone.
bool accel_trusted(const Vec3& accel);

/// IMU-only Madgwick step:
/// q <- normalize(q + dt*(0.5 q x (0,gyro) - beta * grad f / |grad f|)).
/// Throws InputError on non-finite samples or dt <= 0 (state unchanged).
OrientationState madgwick_update(const OrientationState& state, const ImuSample& s);

/// World up direction expressed in the body frame: rotate(q^-1, (0,0,1)).
Vec3 gravity_up(const OrientationState& state);

/// Orientation whose predicted gravity direction matches the given accel
/// reading (minimal rotation); used to seed the filter from the first
/// trusted sample.
OrientationState orientation_from_accel(const Vec3& accel, double beta);

/// CSV with header t_sec,gx,gy,gz,ax,ay,az. dt is reconstructed from
/// successive timestamps; non-increasing time is rejected.
std::vector<ImuSample> load_imu_csv(const std::filesystem::path& path);
void save_imu_csv(const std::vector<ImuSample>& samples,
                  const std::filesystem::path& path);

}  // namespace lzeval
