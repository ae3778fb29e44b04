#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lzeval/config.hpp"
#include "lzeval/homography.hpp"
#include "lzeval/imu.hpp"
#include "lzeval/terrain.hpp"

namespace lzeval {

struct MonoFrameLog {
    int frame_index = 0;
    double raw_error_px = 0.0;
    double filtered_error_px = 0.0;
    int valid_points = 0;
    bool safe = false;
};

struct MonoRunResult {
    std::vector<MonoFrameLog> log;
    bool safe = false;
};

/// Streams the monocular monitor over consecutive frame pairs and writes
/// mono_log.csv to out_dir. The verdict is the final frame's safe flag.
MonoRunResult run_mono(const std::vector<GrayImage>& frames, const PipelineConfig& cfg,
                       const std::filesystem::path& out_dir);

struct StereoRunResult {
    LandingDecision decision;
    GridMap grid;
    DisparityMap disparity;
    Vec3 up;  // camera-frame up direction fed to the terrain grid
    std::vector<std::string> warnings;
};

/// Full stereo evaluation: Madgwick over the IMU stream (nadir up assumed and
/// warned when the stream is empty), block matching with optional left-right
/// check, point cloud, grid fit, footprint decision. Writes disparity.pfm,
/// overlay.ppm and report.json to out_dir.
StereoRunResult run_stereo(const GrayImage& left, const GrayImage& right,
                           const std::vector<ImuSample>& imu, const PipelineConfig& cfg,
                           const std::filesystem::path& out_dir);

struct BenchRow {
    std::string scene;
    double bm_bad_pct = 0.0;
    double bm_lrc_bad_pct = 0.0;
    std::string error;  // non-empty when the scene could not be scored
};

/// Scores every scene directory (left.pgm, right.pgm, gt.pfm) with BM and
/// BM+LRC bad-pixel rates at tau px, writing bench.csv. Malformed scenes are
/// reported in their row and skipped; a directory with no scenes at all is an
/// error. inject_gt scores the ground truth against itself (harness check).
std::vector<BenchRow> run_bench(const std::filesystem::path& dataset_dir,
                                const PipelineConfig& cfg, double tau, bool inject_gt,
                                const std::filesystem::path& out_dir);

/// Conservative AND of the two gates. `overall` is true only when no
/// evaluated verdict is unsafe and at least one verdict was evaluated.
struct CombinedVerdict {
    std::optional<bool> mono_safe;
    std::optional<bool> stereo_safe;
    bool overall = false;
    std::vector<std::string> reasons;
};

CombinedVerdict combine(std::optional<bool> mono_safe, std::optional<bool> stereo_safe);

/// CSV/JSON surfaces (formats documented in the README).
void write_mono_log_csv(const std::vector<MonoFrameLog>& log,
                        const std::filesystem::path& path);
void write_flow_csv(const FlowField& flow, const std::filesystem::path& path);
FlowField load_flow_csv(const std::filesystem::path& path);
std::string grid_report_json(const GridMap& grid, const LandingDecision& decision);

/// Final safe flag parsed back from a mono_log.csv / report.json.
std::optional<bool> mono_verdict_from_log(const std::filesystem::path& csv_path);
std::optional<bool> stereo_verdict_from_report(const std::filesystem::path& json_path);

}  // namespace lzeval
