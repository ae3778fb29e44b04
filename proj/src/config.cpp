#include "lzeval/config.hpp"

#include <cmath>
#include <fstream>

namespace lzeval {

void PipelineConfig::validate() const {
    camera.validate();
    if (mono.stride < 1) throw InputError("flow.stride must be >= 1");
    if (mono.margin < 0) throw InputError("flow.margin must be >= 0");
    if (mono.lk.window < 5 || mono.lk.window % 2 == 0) {
        throw InputError("flow.window must be odd and >= 5");
    }
    if (mono.pyramid_levels < 1) throw InputError("flow.levels must be >= 1");
    if (mono.lk.max_iters < 1) throw InputError("flow.max_iters must be >= 1");
    if (!(mono.lk.eps > 0.0)) throw InputError("flow.eps must be positive");
    if (!(mono.lk.min_eig >= 0.0)) throw InputError("flow.min_eig must be >= 0");
    if (!(mono.alpha >= 0.0 && mono.alpha < 1.0)) {
        throw InputError("mono.alpha must lie in [0, 1)");
    }
    if (!(mono.threshold > 0.0)) throw InputError("mono.threshold must be positive");
    bm.validate();
    if (!(imu_beta >= 0.0)) throw InputError("imu.beta must be >= 0");
    if (!(cell_size > 0.0)) throw InputError("grid.cell_size must be positive");
    if (min_points < 3) throw InputError("grid.min_points must be >= 3");
    if (!(max_range > 0.0)) throw InputError("grid.max_range must be positive");
    if (!(slope_max_deg > 0.0)) throw InputError("decision.slope_max_deg must be positive");
    if (!(rough_max_m > 0.0)) throw InputError("decision.rough_max_m must be positive");
    if (!(footprint_m >= cell_size)) {
        throw InputError("decision.footprint_m must be at least one cell");
    }
    if (overlay_cell_px < 1) throw InputError("overlay.cell_px must be >= 1");
}

namespace {

double parse_num(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InputError("bad numeric value for " + key + ": '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    double v = parse_num(key, value);
    if (v != std::floor(v)) throw InputError(key + " must be an integer");
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw InputError("bad boolean value for " + key + ": '" + value + "'");
}

}  // namespace

void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "camera.fx") cfg.camera.fx = parse_num(key, value);
    else if (key == "camera.fy") cfg.camera.fy = parse_num(key, value);
    else if (key == "camera.cx") cfg.camera.cx = parse_num(key, value);
    else if (key == "camera.cy") cfg.camera.cy = parse_num(key, value);
    else if (key == "camera.baseline") cfg.camera.baseline = parse_num(key, value);
    else if (key == "flow.stride") cfg.mono.stride = parse_int(key, value);
    else if (key == "flow.margin") cfg.mono.margin = parse_int(key, value);
    else if (key == "flow.window") cfg.mono.lk.window = parse_int(key, value);
    else if (key == "flow.levels") cfg.mono.pyramid_levels = parse_int(key, value);
    else if (key == "flow.max_iters") cfg.mono.lk.max_iters = parse_int(key, value);
    else if (key == "flow.eps") cfg.mono.lk.eps = parse_num(key, value);
    else if (key == "flow.min_eig") cfg.mono.lk.min_eig = parse_num(key, value);
    else if (key == "mono.alpha") cfg.mono.alpha = parse_num(key, value);
    else if (key == "mono.threshold") cfg.mono.threshold = parse_num(key, value);
    else if (key == "stereo.block") cfg.bm.block = parse_int(key, value);
    else if (key == "stereo.min_disp") cfg.bm.min_disp = parse_int(key, value);
    else if (key == "stereo.max_disp") cfg.bm.max_disp = parse_int(key, value);
    else if (key == "stereo.texture_threshold") cfg.bm.texture_threshold = parse_num(key, value);
    else if (key == "stereo.uniqueness_ratio") cfg.bm.uniqueness_ratio = parse_num(key, value);
    else if (key == "stereo.lr_tolerance") cfg.bm.lr_tolerance = parse_num(key, value);
    else if (key == "stereo.lr_check") cfg.lr_check = parse_bool(key, value);
    else if (key == "imu.beta") cfg.imu_beta = parse_num(key, value);
    else if (key == "imu.cam_to_imu_w" || key == "imu.cam_to_imu_x" ||
             key == "imu.cam_to_imu_y" || key == "imu.cam_to_imu_z") {
        double v = parse_num(key, value);
        UnitQuaternion q = cfg.cam_to_imu;
        // Stored raw; re-normalized once all four components are applied.
        if (key.back() == 'w') q.w = v;
        else if (key.back() == 'x') q.x = v;
        else if (key.back() == 'y') q.y = v;
        else q.z = v;
        cfg.cam_to_imu = UnitQuaternion::normalized(q.w, q.x, q.y, q.z);
    }
    else if (key == "grid.cell_size") cfg.cell_size = parse_num(key, value);
    else if (key == "grid.min_points") cfg.min_points = parse_int(key, value);
    else if (key == "grid.max_range") cfg.max_range = parse_num(key, value);
    else if (key == "decision.slope_max_deg") cfg.slope_max_deg = parse_num(key, value);
    else if (key == "decision.rough_max_m") cfg.rough_max_m = parse_num(key, value);
    else if (key == "decision.footprint_m") cfg.footprint_m = parse_num(key, value);
    else if (key == "overlay.cell_px") cfg.overlay_cell_px = parse_int(key, value);
    else throw InputError("unknown config key: " + key);
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    PipelineConfig cfg;
    std::string line;
    size_t lineno = 0;
    auto trim = [](std::string s) {
        size_t b = s.find_first_not_of(" \t\r");
        size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw InputError(path.string() + ": line " + std::to_string(lineno) +
                             " is not key = value");
        }
        apply_config_entry(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

}  // namespace lzeval
