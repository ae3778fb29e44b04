#include "lzeval/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "lzeval/image_io.hpp"
#include "lzeval/stereo.hpp"

namespace lzeval {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
}

}  // namespace

void write_mono_log_csv(const std::vector<MonoFrameLog>& log,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "frame_index,raw_error_px,filtered_error_px,valid_points,safe\n";
    for (const MonoFrameLog& row : log) {
        out << row.frame_index << ',' << fmt(row.raw_error_px) << ','
            << fmt(row.filtered_error_px) << ',' << row.valid_points << ','
            << (row.safe ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

void write_flow_csv(const FlowField& flow, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "x,y,dx,dy,valid\n";
    for (size_t i = 0; i < flow.size(); ++i) {
        out << fmt(flow.points[i].x) << ',' << fmt(flow.points[i].y) << ','
            << fmt(flow.displacements[i].x) << ',' << fmt(flow.displacements[i].y) << ','
            << (flow.valid[i] ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

FlowField load_flow_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || (line != "x,y,dx,dy,valid" && line != "x,y,dx,dy,valid\r")) {
        throw IoError(path.string() + ": bad flow CSV header");
    }
    FlowField flow;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        double v[4];
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(ss, field, ',')) throw IoError(path.string() + ": short row");
            v[i] = std::stod(field);
        }
        if (!std::getline(ss, field)) throw IoError(path.string() + ": short row");
        flow.points.push_back({v[0], v[1]});
        flow.displacements.push_back({v[2], v[3]});
        flow.valid.push_back(field == "1" ? 1 : 0);
    }
    return flow;
}

MonoRunResult run_mono(const std::vector<GrayImage>& frames, const PipelineConfig& cfg,
                       const std::filesystem::path& out_dir) {
    cfg.validate();
    if (frames.size() < 2) throw InputError("mono evaluation needs at least 2 frames");
    for (size_t i = 1; i < frames.size(); ++i) {
        if (!frames[i].same_size(frames[0])) {
            throw InputError("frame " + std::to_string(i) + " size differs from frame 0");
        }
    }
    ensure_dir(out_dir);

    MonoRunResult result;
    PlanarityState state;
    state.alpha = cfg.mono.alpha;
    state.threshold = cfg.mono.threshold;
    for (size_t i = 1; i < frames.size(); ++i) {
        int valid_points = 0;
        state = mono_evaluate(frames[i - 1], frames[i], state, cfg.mono, &valid_points);
        result.log.push_back({static_cast<int>(i), state.raw_error, state.filtered_error,
                              valid_points, state.safe});
    }
    result.safe = state.safe;
    write_mono_log_csv(result.log, out_dir / "mono_log.csv");
    return result;
}

std::string grid_report_json(const GridMap& grid, const LandingDecision& decision) {
    nlohmann::ordered_json j;
    j["cell_size"] = grid.cell_size;
    j["origin"] = {grid.origin_x, grid.origin_y};
    j["nadir_cell"] = {grid.nadir_i, grid.nadir_j};
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (int cj = 0; cj < grid.ny; ++cj) {
        for (int ci = 0; ci < grid.nx; ++ci) {
            const auto& stats = grid.at(ci, cj);
            nlohmann::ordered_json cell;
            cell["i"] = ci;
            cell["j"] = cj;
            cell["count"] = stats ? stats->count : 0;
            if (stats) {
                cell["slope_deg"] = stats->slope_deg;
                cell["roughness_m"] = stats->roughness_m;
            } else {
                cell["slope_deg"] = nullptr;
                cell["roughness_m"] = nullptr;
            }
            cell["verdict"] =
                to_string(decision.cell_verdicts[static_cast<size_t>(cj) * grid.nx + ci]);
            cells.push_back(std::move(cell));
        }
    }
    j["cells"] = std::move(cells);
    j["decision"] = {{"safe", decision.safe}, {"reason", to_string(decision.reason)}};
    return j.dump(2) + "\n";
}

StereoRunResult run_stereo(const GrayImage& left, const GrayImage& right,
                           const std::vector<ImuSample>& imu, const PipelineConfig& cfg,
                           const std::filesystem::path& out_dir) {
    cfg.validate();
    if (!left.same_size(right)) throw InputError("stereo pair sizes differ");
    cfg.camera.validate_for(left.width, left.height);
    ensure_dir(out_dir);

    StereoRunResult result;

    if (imu.empty()) {
        result.up = Vec3{0, 0, -1};  // nadir camera assumed
        result.warnings.push_back("empty IMU stream: assuming nadir view (up = -z)");
    } else {
        OrientationState state;
        state.beta = cfg.imu_beta;
        bool seeded = false;
        for (const ImuSample& s : imu) {
            if (!seeded && accel_trusted(s.accel)) {
                state = orientation_from_accel(s.accel, cfg.imu_beta);
                seeded = true;
            }
            state = madgwick_update(state, s);
        }
        if (!seeded) {
            result.warnings.push_back(
                "no trusted accelerometer sample: orientation from gyro only");
        }
        Vec3 up_imu = gravity_up(state);
        result.up = rotate_vector(cfg.cam_to_imu.conjugate(), up_imu);
    }

    DisparityMap disp = compute_disparity(left, right, cfg.bm);
    if (cfg.lr_check) {
        DisparityMap disp_r = compute_right_disparity(left, right, cfg.bm);
        disp = left_right_check(disp, disp_r, cfg.bm.lr_tolerance);
    }

    PointCloud cloud = build_point_cloud(disp, cfg.camera, result.up, cfg.max_range);
    result.grid = bin_and_fit(cloud, cfg.cell_size, cfg.min_points);
    result.decision = classify_footprint(result.grid, cfg.slope_max_deg, cfg.rough_max_m,
                                         cfg.footprint_m);
    result.disparity = std::move(disp);

    save_pfm({result.disparity.width, result.disparity.height, result.disparity.d},
             out_dir / "disparity.pfm");
    save_ppm(render_overlay(result.grid, result.decision, cfg.overlay_cell_px),
             out_dir / "overlay.ppm");
    std::ofstream report(out_dir / "report.json");
    if (!report) throw IoError("cannot write report.json");
    report << grid_report_json(result.grid, result.decision);
    if (!report) throw IoError("failed writing report.json");
    return result;
}

std::vector<BenchRow> run_bench(const std::filesystem::path& dataset_dir,
                                const PipelineConfig& cfg, double tau, bool inject_gt,
                                const std::filesystem::path& out_dir) {
    cfg.validate();
    if (!(tau >= 0.0)) throw InputError("tau must be >= 0");
    if (!std::filesystem::is_directory(dataset_dir)) {
        throw InputError("dataset directory not found: " + dataset_dir.string());
    }
    std::set<std::string> scene_names;
    for (const auto& entry : std::filesystem::directory_iterator(dataset_dir)) {
        if (entry.is_directory()) scene_names.insert(entry.path().filename().string());
    }
    if (scene_names.empty()) {
        throw InputError("dataset directory contains no scene subdirectories");
    }
    ensure_dir(out_dir);

    std::vector<BenchRow> rows;
    for (const std::string& name : scene_names) {
        BenchRow row;
        row.scene = name;
        try {
            const auto scene_dir = dataset_dir / name;
            GrayImage left = load_pgm(scene_dir / "left.pgm");
            GrayImage right = load_pgm(scene_dir / "right.pgm");
            FloatRaster gt_raster = load_pfm(scene_dir / "gt.pfm");
            if (gt_raster.width != left.width || gt_raster.height != left.height) {
                throw InputError("ground truth size differs from the images");
            }
            DisparityMap gt(gt_raster.width, gt_raster.height);
            gt.d = std::move(gt_raster.data);

            if (inject_gt) {
                row.bm_bad_pct = bad_pixel_rate(gt, gt, tau);
                row.bm_lrc_bad_pct = row.bm_bad_pct;
            } else {
                DisparityMap est = compute_disparity(left, right, cfg.bm);
                row.bm_bad_pct = bad_pixel_rate(est, gt, tau);
                DisparityMap est_r = compute_right_disparity(left, right, cfg.bm);
                DisparityMap est_lrc = left_right_check(est, est_r, cfg.bm.lr_tolerance);
                row.bm_lrc_bad_pct = bad_pixel_rate(est_lrc, gt, tau);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }

    std::ofstream out(out_dir / "bench.csv");
    if (!out) throw IoError("cannot write bench.csv");
    out << "scene,bm_bad_pct,bm_lrc_bad_pct,error\n";
    for (const BenchRow& row : rows) {
        if (row.error.empty()) {
            out << row.scene << ',' << fmt(row.bm_bad_pct) << ',' << fmt(row.bm_lrc_bad_pct)
                << ",\n";
        } else {
            std::string msg = row.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            out << row.scene << ",,," << msg << '\n';
        }
    }
    if (!out) throw IoError("failed writing bench.csv");
    return rows;
}

CombinedVerdict combine(std::optional<bool> mono_safe, std::optional<bool> stereo_safe) {
    if (!mono_safe.has_value() && !stereo_safe.has_value()) {
        throw InputError("combine needs at least one evaluated verdict");
    }
    CombinedVerdict v;
    v.mono_safe = mono_safe;
    v.stereo_safe = stereo_safe;
    v.overall = mono_safe.value_or(true) && stereo_safe.value_or(true);
    if (mono_safe.has_value() && !*mono_safe) v.reasons.push_back("mono_unsafe");
    if (stereo_safe.has_value() && !*stereo_safe) v.reasons.push_back("stereo_unsafe");
    if (!mono_safe.has_value()) v.reasons.push_back("mono_not_evaluated");
    if (!stereo_safe.has_value()) v.reasons.push_back("stereo_not_evaluated");
    return v;
}

std::optional<bool> mono_verdict_from_log(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path.string());
    std::string line, last;
    if (!std::getline(in, line)) throw IoError(csv_path.string() + ": empty log");
    while (std::getline(in, line)) {
        if (!line.empty()) last = line;
    }
    if (last.empty()) return std::nullopt;  // header only: nothing evaluated
    auto comma = last.rfind(',');
    if (comma == std::string::npos) throw IoError(csv_path.string() + ": malformed log row");
    std::string flag = last.substr(comma + 1);
    if (!flag.empty() && flag.back() == '\r') flag.pop_back();
    if (flag == "1") return true;
    if (flag == "0") return false;
    throw IoError(csv_path.string() + ": malformed safe flag '" + flag + "'");
}

std::optional<bool> stereo_verdict_from_report(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw IoError("cannot open " + json_path.string());
    nlohmann::json j;
    try {
        in >> j;
        return j.at("decision").at("safe").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(json_path.string() + ": bad report: " + e.what());
    }
}

}  // namespace lzeval
