#pragma once

#include <filesystem>
#include <string>

#include "lzeval/geometry.hpp"
#include "lzeval/homography.hpp"
#include "lzeval/stereo.hpp"

namespace lzeval {

/// Every tunable of the two pipelines, with the module defaults. Loaded from
/// a flat `section.key = value` text file; unknown keys are hard errors.
struct PipelineConfig {
    CameraIntrinsics camera;

    MonoConfig mono;

    BlockMatchParams bm;
    bool lr_check = true;

    double imu_beta = 0.1;
    UnitQuaternion cam_to_imu;  // camera-to-IMU rotation, identity by default

    double cell_size = 0.5;   // meters
    int min_points = 20;
    double max_range = 20.0;  // meters

    double slope_max_deg = 15.0;
    double rough_max_m = 0.05;
    double footprint_m = 1.0;

    int overlay_cell_px = 40;

    /// Throws InputError when any value violates its owning module's
    /// preconditions.
    void validate() const;
};

/// Applies one `section.key` assignment; throws InputError on unknown keys or
/// unparseable values.
void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

/// Defaults overridden by the file's entries, then validated.
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace lzeval
