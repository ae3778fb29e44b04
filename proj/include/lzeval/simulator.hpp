#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lzeval/geometry.hpp"
#include "lzeval/homography.hpp"
#include "lzeval/image.hpp"
#include "lzeval/imu.hpp"
#include "lzeval/stereo.hpp"

namespace lzeval {

enum class SceneKind {
    FlatPlane,
    Ramp,
    BoxOnPlane,
    Step,
    RippleSurface,
    Textureless,
};

SceneKind scene_kind_from_string(const std::string& s);
std::string to_string(SceneKind k);

/// Synthetic nadir-looking scene: a procedurally textured surface below the
/// camera, imaged by a rectified stereo pair. The left camera sits at the
/// origin, the right camera at +baseline along x.
struct SceneSpec {
    SceneKind kind = SceneKind::FlatPlane;
    double depth_m = 2.0;      // ground depth along the optical axis
    double ramp_deg = 20.0;    // in (0, 45]
    double box_w = 0.4;        // box extent along x, meters
    double box_d = 0.3;        // box extent along y, meters
    double box_h = 0.3;        // box height, meters
    double step_h = 0.3;       // step height, meters
    double ripple_amp_px = 2.0;
    double ripple_wavelength_px = 80.0;
    uint32_t texture_seed = 1;
    CameraIntrinsics camera;
    int width = 640;
    int height = 480;

    void validate() const;
};

/// Flat key=value scene file (keys: kind, depth_m, ramp_deg, box_w, box_d,
/// box_h, step_h, ripple_amp_px, ripple_wavelength_px, seed, fx, fy, cx, cy,
/// baseline, width, height). Unknown keys are rejected.
SceneSpec load_scene_spec(const std::filesystem::path& path);

/// Exact per-pixel ground truth for a rendered scene.
struct GroundTruth {
    DisparityMap disparity;  // analytic, right-occluded pixels invalid
    /// Constant analytic surface slope, set for plane-like kinds only.
    std::optional<double> constant_slope_deg;
    bool safe_label = false;
};

struct StereoScene {
    GrayImage left;
    GrayImage right;
    GroundTruth gt;
};

/// Ray-casts both rectified views of the scene and fills the analytic
/// disparity (d = fx*baseline/Z). Deterministic in (spec, texture_seed).
StereoScene render_stereo(const SceneSpec& spec);

/// Monocular descent sequence. Rigid kinds move the camera straight down, so
/// successive frames of the planar scenes differ by an exact homography;
/// the ripple kind additionally warps each frame by a traveling sinusoid in
/// image space. gt_flows holds the exact frame-to-frame displacement at the
/// sample grid; gt_homographies (planar kinds only) map next-frame points
/// back to the previous frame.
struct MonoSequence {
    std::vector<GrayImage> frames;
    std::vector<FlowField> gt_flows;         // size n_frames-1
    std::vector<Homography> gt_homographies;  // size n_frames-1 or empty
    bool safe_label = false;
};

MonoSequence render_mono_sequence(const SceneSpec& spec, int n_frames,
                                  double descent_rate_mps, double frame_dt_s,
                                  int sample_stride = 20, int sample_margin = 20);

/// Synthesizes an IMU stream from an orientation trajectory sampled at
/// `rate` Hz: body rates from successive quaternions, gravity rotated into
/// the body frame, seeded Gaussian noise on both channels.
std::vector<ImuSample> generate_imu(const std::vector<UnitQuaternion>& trajectory,
                                    double rate_hz, double gyro_noise_sd,
                                    double accel_noise_sd, uint64_t seed = 1);

/// Band-limited value-noise texture image (the simulator's surface texture,
/// exposed for synthetic-shift tests). base_wavelength_px sets the coarsest
/// feature size.
GrayImage noise_image(int width, int height, uint32_t seed,
                      double base_wavelength_px = 12.0);

}  // namespace lzeval
