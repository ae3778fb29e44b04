// Landing-zone evaluation CLI: mono, stereo, bench, simulate, combine.
// Exit codes: 0 = evaluated safe, 1 = evaluated unsafe, 2 = error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <omp.h>
#include <optional>
#include <string>
#include <vector>

#include "lzeval/image_io.hpp"
#include "lzeval/pipeline.hpp"
#include "lzeval/simulator.hpp"

namespace fs = std::filesystem;
using namespace lzeval;

namespace {

constexpr int kExitSafe = 0;
constexpr int kExitUnsafe = 1;
constexpr int kExitError = 2;

PipelineConfig config_or_default(const std::string& path) {
    if (path.empty()) return PipelineConfig{};
    return load_config(path);
}

int cmd_mono(const std::vector<std::string>& frame_paths, const std::string& config_path,
             const std::string& out_dir) {
    PipelineConfig cfg = config_or_default(config_path);
    std::vector<GrayImage> frames;
    frames.reserve(frame_paths.size());
    for (const std::string& p : frame_paths) frames.push_back(load_pgm(p));
    MonoRunResult result = run_mono(frames, cfg, out_dir);
    const MonoFrameLog& last = result.log.back();
    std::printf("mono: %s (filtered_error=%.4f px over %zu frame pairs)\n",
                result.safe ? "safe" : "unsafe", last.filtered_error_px, result.log.size());
    return result.safe ? kExitSafe : kExitUnsafe;
}

int cmd_stereo(const std::string& left_path, const std::string& right_path,
               const std::string& imu_path, const std::string& config_path,
               const std::string& out_dir) {
    PipelineConfig cfg = config_or_default(config_path);
    GrayImage left = load_pgm(left_path);
    GrayImage right = load_pgm(right_path);
    std::vector<ImuSample> imu;
    if (!imu_path.empty()) imu = load_imu_csv(imu_path);
    StereoRunResult result = run_stereo(left, right, imu, cfg, out_dir);
    for (const std::string& warning : result.warnings) {
        std::fprintf(stderr, "warning: %s\n", warning.c_str());
    }
    std::printf("stereo: %s (reason=%s)\n", result.decision.safe ? "safe" : "unsafe",
                to_string(result.decision.reason).c_str());
    return result.decision.safe ? kExitSafe : kExitUnsafe;
}

int cmd_bench(const std::string& dataset_dir, const std::string& config_path,
              const std::string& out_dir, double tau, bool inject_gt) {
    PipelineConfig cfg = config_or_default(config_path);
    std::vector<BenchRow> rows = run_bench(dataset_dir, cfg, tau, inject_gt, out_dir);
    size_t scored = 0;
    for (const BenchRow& row : rows) {
        if (row.error.empty()) {
            std::printf("%-20s BM %6.2f%%   BM+LRC %6.2f%%\n", row.scene.c_str(),
                        row.bm_bad_pct, row.bm_lrc_bad_pct);
            ++scored;
        } else {
            std::printf("%-20s error: %s\n", row.scene.c_str(), row.error.c_str());
        }
    }
    if (scored == 0) {
        std::fprintf(stderr, "error: no scene could be scored\n");
        return kExitError;
    }
    return kExitSafe;
}

int cmd_simulate(const std::string& scene_path, const std::string& out_dir,
                 std::optional<uint32_t> seed, int mono_frames, double descent_rate,
                 double frame_dt, double imu_seconds, double imu_rate) {
    SceneSpec spec = load_scene_spec(scene_path);
    if (seed) spec.texture_seed = *seed;
    fs::create_directories(out_dir);

    StereoScene scene = render_stereo(spec);
    save_pgm(scene.left, fs::path(out_dir) / "left.pgm");
    save_pgm(scene.right, fs::path(out_dir) / "right.pgm");
    save_pfm({scene.gt.disparity.width, scene.gt.disparity.height, scene.gt.disparity.d},
             fs::path(out_dir) / "gt.pfm");

    if (mono_frames > 0) {
        MonoSequence seq = render_mono_sequence(spec, mono_frames, descent_rate, frame_dt);
        for (size_t i = 0; i < seq.frames.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "frame_%03zu.pgm", i);
            save_pgm(seq.frames[i], fs::path(out_dir) / name);
        }
        for (size_t i = 0; i < seq.gt_flows.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "gt_flow_%03zu.csv", i);
            write_flow_csv(seq.gt_flows[i], fs::path(out_dir) / name);
        }
    }

    if (imu_seconds > 0.0) {
        // Static nadir attitude: camera z looks straight down.
        UnitQuaternion nadir = UnitQuaternion::from_axis_angle({1, 0, 0}, M_PI);
        size_t n = static_cast<size_t>(imu_seconds * imu_rate) + 1;
        std::vector<UnitQuaternion> traj(std::max<size_t>(n, 2), nadir);
        std::vector<ImuSample> samples =
            generate_imu(traj, imu_rate, 0.002, 0.05, spec.texture_seed);
        save_imu_csv(samples, fs::path(out_dir) / "imu.csv");
    }

    std::printf("simulate: wrote %s scene to %s\n", to_string(spec.kind).c_str(),
                out_dir.c_str());
    return kExitSafe;
}

int cmd_combine(const std::string& mono_log, const std::string& stereo_report) {
    std::optional<bool> mono, stereo;
    if (!mono_log.empty()) mono = mono_verdict_from_log(mono_log);
    if (!stereo_report.empty()) stereo = stereo_verdict_from_report(stereo_report);
    CombinedVerdict v = combine(mono, stereo);
    std::string reasons;
    for (const std::string& r : v.reasons) {
        if (!reasons.empty()) reasons += ",";
        reasons += r;
    }
    std::printf("combined: %s%s%s\n", v.overall ? "safe" : "unsafe",
                reasons.empty() ? "" : " reasons=", reasons.c_str());
    return v.overall ? kExitSafe : kExitUnsafe;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Landing-zone evaluation toolkit"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "OpenMP thread count (0 = default)");

    std::string config_path, out_dir = ".";

    auto* mono = app.add_subcommand("mono", "Monocular planarity gate over a frame sequence");
    std::vector<std::string> frame_paths;
    mono->add_option("frames", frame_paths, "PGM frames in order")->required()->expected(2, -1);
    mono->add_option("--config", config_path, "pipeline config file");
    mono->add_option("--out", out_dir, "output directory");

    auto* stereo = app.add_subcommand("stereo", "Stereo slope/roughness landing decision");
    std::string left_path, right_path, imu_path;
    stereo->add_option("--left", left_path, "left PGM")->required();
    stereo->add_option("--right", right_path, "right PGM")->required();
    stereo->add_option("--imu", imu_path, "IMU CSV stream");
    stereo->add_option("--config", config_path, "pipeline config file");
    stereo->add_option("--out", out_dir, "output directory");

    auto* bench = app.add_subcommand("bench", "Bad-pixel benchmark over a scene dataset");
    std::string dataset_dir;
    double tau = 4.0;
    bool inject_gt = false;
    bench->add_option("--dataset", dataset_dir, "directory of scene subdirectories")->required();
    bench->add_option("--config", config_path, "pipeline config file");
    bench->add_option("--out", out_dir, "output directory");
    bench->add_option("--tau", tau, "bad-pixel threshold, px (default 4)");
    bench->add_flag("--inject-gt", inject_gt, "score ground truth against itself");

    auto* simulate = app.add_subcommand("simulate", "Render a synthetic scene with ground truth");
    std::string scene_path;
    std::optional<uint32_t> seed;
    int mono_frames = 0;
    double descent_rate = 0.3, frame_dt = 0.1, imu_seconds = 0.0, imu_rate = 100.0;
    simulate->add_option("--scene", scene_path, "scene spec file")->required();
    simulate->add_option("--out", out_dir, "output directory");
    simulate->add_option("--seed", seed, "override the scene texture seed");
    simulate->add_option("--mono-frames", mono_frames, "also render a descent sequence");
    simulate->add_option("--descent-rate", descent_rate, "descent speed, m/s");
    simulate->add_option("--frame-dt", frame_dt, "frame interval, s");
    simulate->add_option("--imu-seconds", imu_seconds, "also emit a static IMU stream");
    simulate->add_option("--imu-rate", imu_rate, "IMU sample rate, Hz");

    auto* comb = app.add_subcommand("combine", "Conservative AND of the two gates");
    std::string mono_log, stereo_report;
    comb->add_option("--mono-log", mono_log, "mono_log.csv from a mono run");
    comb->add_option("--stereo-report", stereo_report, "report.json from a stereo run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (threads > 0) omp_set_num_threads(threads);
        if (*mono) return cmd_mono(frame_paths, config_path, out_dir);
        if (*stereo) return cmd_stereo(left_path, right_path, imu_path, config_path, out_dir);
        if (*bench) return cmd_bench(dataset_dir, config_path, out_dir, tau, inject_gt);
        if (*simulate) {
            return cmd_simulate(scene_path, out_dir, seed, mono_frames, descent_rate,
                                frame_dt, imu_seconds, imu_rate);
        }
        if (*comb) {
            if (mono_log.empty() && stereo_report.empty()) {
                throw InputError("combine needs --mono-log and/or --stereo-report");
            }
            return cmd_combine(mono_log, stereo_report);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
