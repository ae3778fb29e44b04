#include "lzeval/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lzeval {

SceneKind scene_kind_from_string(const std::string& s) {
    if (s == "flat_plane") return SceneKind::FlatPlane;
    if (s == "ramp") return SceneKind::Ramp;
    if (s == "box_on_plane") return SceneKind::BoxOnPlane;
    if (s == "step") return SceneKind::Step;
    if (s == "ripple_surface") return SceneKind::RippleSurface;
    if (s == "textureless") return SceneKind::Textureless;
    throw InputError("unknown scene kind: " + s);
}

std::string to_string(SceneKind k) {
    switch (k) {
        case SceneKind::FlatPlane: return "flat_plane";
        case SceneKind::Ramp: return "ramp";
        case SceneKind::BoxOnPlane: return "box_on_plane";
        case SceneKind::Step: return "step";
        case SceneKind::RippleSurface: return "ripple_surface";
        case SceneKind::Textureless: return "textureless";
    }
    return "flat_plane";
}

void SceneSpec::validate() const {
    if (width < 32 || height < 32) throw InputError("scene image must be at least 32x32");
    camera.validate_for(width, height);
    if (!(depth_m > 0.1)) throw InputError("surface depth must exceed 0.1 m");
    if (kind == SceneKind::Ramp && !(ramp_deg > 0.0 && ramp_deg <= 45.0)) {
        throw InputError("ramp angle must lie in (0, 45] degrees");
    }
    if (kind == SceneKind::BoxOnPlane) {
        if (!(box_w > 0.0 && box_d > 0.0 && box_h > 0.0)) {
            throw InputError("box dimensions must be positive");
        }
        if (!(depth_m - box_h > 0.1)) {
            throw InputError("box top would sit behind the camera");
        }
    }
    if (kind == SceneKind::Step) {
        if (!(step_h > 0.0)) throw InputError("step height must be positive");
        if (!(depth_m - step_h > 0.1)) throw InputError("step would sit behind the camera");
    }
    if (kind == SceneKind::RippleSurface) {
        if (!(ripple_amp_px >= 0.0)) throw InputError("ripple amplitude must be >= 0");
        if (!(ripple_wavelength_px > 1.0)) throw InputError("ripple wavelength must exceed 1 px");
    }
    if (kind == SceneKind::Ramp) {
        // Every image ray must meet the ramp in front of the camera.
        double tan_a = std::tan(ramp_deg * M_PI / 180.0);
        double rx_max = std::max(camera.cx, width - 1 - camera.cx) / camera.fx;
        if (1.0 - tan_a * rx_max <= 0.05) {
            throw InputError("ramp too steep for the field of view");
        }
    }
}

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic lattice value in [0, 1), independent of evaluation order.
double lattice_value(int64_t xi, int64_t yi, uint32_t seed, uint32_t octave) {
    uint64_t h = splitmix64(static_cast<uint64_t>(xi) * 0x9ddfea08eb382d69ull ^
                            splitmix64(static_cast<uint64_t>(yi) ^
                                       (static_cast<uint64_t>(seed) << 32 | octave)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(double x, double y, uint32_t seed, uint32_t octave) {
    double fx = std::floor(x), fy = std::floor(y);
    int64_t xi = static_cast<int64_t>(fx), yi = static_cast<int64_t>(fy);
    double tx = smoothstep(x - fx), ty = smoothstep(y - fy);
    double v00 = lattice_value(xi, yi, seed, octave);
    double v10 = lattice_value(xi + 1, yi, seed, octave);
    double v01 = lattice_value(xi, yi + 1, seed, octave);
    double v11 = lattice_value(xi + 1, yi + 1, seed, octave);
    double top = v00 + (v10 - v00) * tx;
    double bot = v01 + (v11 - v01) * tx;
    return top + (bot - top) * ty;
}

// Band-limited texture: four octaves of value noise around 0.5.
double texture_value(double x, double y, uint32_t seed, double base_wavelength) {
    double t = 0.0;
    double amp = 0.5;
    double freq = 1.0 / base_wavelength;
    for (uint32_t o = 0; o < 4; ++o) {
        t += amp * (value_noise(x * freq, y * freq, seed, o) - 0.5);
        amp *= 0.5;
        freq *= 2.0;
    }
    return std::clamp(0.5 + 1.4 * t, 0.0, 1.0);
}

// Depth along z of the first surface hit by the ray (ox,0,0) + t*(rx,ry,1),
// camera coordinates. Returns a negative value when the ray misses.
double hit_depth(const SceneSpec& spec, double depth, double ox, double rx, double ry) {
    switch (spec.kind) {
        case SceneKind::FlatPlane:
        case SceneKind::RippleSurface:
        case SceneKind::Textureless:
            return depth;
        case SceneKind::Ramp: {
            double tan_a = std::tan(spec.ramp_deg * M_PI / 180.0);
            double denom = 1.0 - tan_a * rx;
            if (denom <= 1e-9) return -1.0;
            double t = (depth + tan_a * ox) / denom;
            return t > 0.0 ? t : -1.0;
        }
        case SceneKind::BoxOnPlane: {
            double t_top = depth - spec.box_h;
            double hx = ox + t_top * rx;
            double hy = t_top * ry;
            if (std::abs(hx) <= 0.5 * spec.box_w && std::abs(hy) <= 0.5 * spec.box_d) {
                return t_top;
            }
            return depth;
        }
        case SceneKind::Step: {
            double t_high = depth - spec.step_h;
            if (ox + t_high * rx >= 0.0) return t_high;
            if (ox + depth * rx < 0.0) return depth;
            // Vertical riser at x = 0.
            return std::abs(rx) > 1e-12 ? -ox / rx : depth;
        }
    }
    return depth;
}

// Surface texture wavelength in meters: ~10 px at the nominal depth.
double texture_base_wavelength(const SceneSpec& spec) {
    return 10.0 * spec.depth_m / spec.camera.fx;
}

double shade_point(const SceneSpec& spec, double sx, double sy) {
    if (spec.kind == SceneKind::Textureless) return 0.5;
    return texture_value(sx, sy, spec.texture_seed, texture_base_wavelength(spec));
}

// Renders one pixel of the camera at lateral offset ox. Returns the hit
// depth through t_out (negative on miss).
float render_pixel(const SceneSpec& spec, double depth, double ox, int x, int y,
                   double* t_out) {
    const CameraIntrinsics& k = spec.camera;
    double rx = (x - k.cx) / k.fx;
    double ry = (y - k.cy) / k.fy;
    double t = hit_depth(spec, depth, ox, rx, ry);
    if (t_out) *t_out = t;
    if (t <= 0.0) return 0.5f;
    return static_cast<float>(shade_point(spec, ox + t * rx, t * ry));
}

}  // namespace

GrayImage noise_image(int width, int height, uint32_t seed, double base_wavelength_px) {
    if (width <= 0 || height <= 0) throw InputError("image dimensions must be positive");
    if (!(base_wavelength_px > 1.0)) throw InputError("base wavelength must exceed 1 px");
    GrayImage img(width, height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            img.at(x, y) =
                static_cast<float>(texture_value(x, y, seed, base_wavelength_px));
        }
    }
    return img;
}

StereoScene render_stereo(const SceneSpec& spec) {
    spec.validate();
    const CameraIntrinsics& k = spec.camera;
    const int w = spec.width, h = spec.height;

    StereoScene scene;
    scene.left = GrayImage(w, h);
    scene.right = GrayImage(w, h);
    scene.gt.disparity = DisparityMap(w, h);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double t_left;
            scene.left.at(x, y) = render_pixel(spec, spec.depth_m, 0.0, x, y, &t_left);
            scene.right.at(x, y) = render_pixel(spec, spec.depth_m, k.baseline, x, y, nullptr);

            if (t_left <= 0.0) continue;
            double rx = (x - k.cx) / k.fx;
            double ry = (y - k.cy) / k.fy;
            Vec3 p{t_left * rx, t_left * ry, t_left};

            // Visible from the right camera? Re-cast the exact ray to the
            // point and demand it is not blocked, and that it projects into
            // the right frame.
            double rrx = (p.x - k.baseline) / p.z;
            double rry = p.y / p.z;
            double t_right = hit_depth(spec, spec.depth_m, k.baseline, rrx, rry);
            if (t_right > 0.0 && t_right < p.z - 1e-6) continue;  // occluded
            double ur = k.fx * rrx + k.cx;
            if (ur < 0.0 || ur > w - 1.0) continue;  // outside the right view

            scene.gt.disparity.at(x, y) = static_cast<float>(k.fx * k.baseline / p.z);
        }
    }

    switch (spec.kind) {
        case SceneKind::FlatPlane:
        case SceneKind::RippleSurface:
            scene.gt.constant_slope_deg = 0.0;
            scene.gt.safe_label = true;
            break;
        case SceneKind::Textureless:
            scene.gt.constant_slope_deg = 0.0;
            scene.gt.safe_label = false;  // no texture means no data to trust
            break;
        case SceneKind::Ramp:
            scene.gt.constant_slope_deg = spec.ramp_deg;
            scene.gt.safe_label = spec.ramp_deg <= 15.0;
            break;
        case SceneKind::BoxOnPlane:
            scene.gt.safe_label = spec.box_h <= 0.1;
            break;
        case SceneKind::Step:
            scene.gt.safe_label = spec.step_h <= 0.1;
            break;
    }
    return scene;
}

namespace {

struct RippleWarp {
    double amp = 0.0;
    double wavelength = 80.0;
    double phase = 0.0;

    Vec2 offset(const Vec2& p) const {
        double k = 2.0 * M_PI / wavelength;
        return {amp * std::sin(k * p.y + phase), amp * std::cos(k * p.x + phase)};
    }
};

constexpr double kRipplePhaseStep = 0.9;  // rad per frame

// Continuous evaluation of the rigid left-camera rendering at depth `depth`.
double rigid_sample(const SceneSpec& spec, double depth, const Vec2& px) {
    const CameraIntrinsics& k = spec.camera;
    double rx = (px.x - k.cx) / k.fx;
    double ry = (px.y - k.cy) / k.fy;
    double t = hit_depth(spec, depth, 0.0, rx, ry);
    if (t <= 0.0) return 0.5;
    return shade_point(spec, t * rx, t * ry);
}

// Ground-truth homography mapping frame-(k+1) pixels back to frame k for a
// camera descending by dz toward the planar scene: H = K (I + t n^T / d) K^-1
// with t = (0, 0, dz) and the plane written n.X = d in next-frame coordinates.
Homography planar_gt_homography(const SceneSpec& spec, double next_depth, double dz) {
    double tan_a = spec.kind == SceneKind::Ramp ? std::tan(spec.ramp_deg * M_PI / 180.0) : 0.0;
    // Plane z - tan_a*x = next_depth, so n = (-tan_a, 0, 1), d = next_depth.
    double m20 = -dz * tan_a / next_depth;
    double m22 = 1.0 + dz / next_depth;
    const CameraIntrinsics& k = spec.camera;
    // K * M * K^-1 expanded with M = [[1,0,0],[0,1,0],[m20,0,m22]].
    std::array<double, 9> hm{
        1.0 + k.cx * m20 / k.fx, 0.0, k.cx * m22 - (1.0 + k.cx * m20 / k.fx) * k.cx,
        k.cy * m20 / k.fx,       1.0, k.cy * m22 - k.cy - (k.cy * m20 / k.fx) * k.cx,
        m20 / k.fx,              0.0, m22 - (m20 / k.fx) * k.cx,
    };
    return Homography::from_matrix(hm);
}

}  // namespace

MonoSequence render_mono_sequence(const SceneSpec& spec, int n_frames,
                                  double descent_rate_mps, double frame_dt_s,
                                  int sample_stride, int sample_margin) {
    spec.validate();
    if (n_frames < 2) throw InputError("sequence needs at least 2 frames");
    if (!(frame_dt_s > 0.0)) throw InputError("frame interval must be positive");
    if (!(descent_rate_mps >= 0.0)) throw InputError("descent rate must be >= 0");
    const double final_depth = spec.depth_m - descent_rate_mps * frame_dt_s * (n_frames - 1);
    double clearance = 0.1;
    if (spec.kind == SceneKind::BoxOnPlane) clearance += spec.box_h;
    if (spec.kind == SceneKind::Step) clearance += spec.step_h;
    if (final_depth <= clearance) {
        throw InputError("descent would pass through the surface");
    }

    const bool rippled = spec.kind == SceneKind::RippleSurface;
    const bool planar = spec.kind == SceneKind::FlatPlane ||
                        spec.kind == SceneKind::Ramp ||
                        spec.kind == SceneKind::Textureless;
    const int w = spec.width, h = spec.height;

    MonoSequence seq;
    seq.safe_label = !rippled;
    seq.frames.reserve(n_frames);

    std::vector<double> depths(n_frames);
    for (int f = 0; f < n_frames; ++f) {
        depths[f] = spec.depth_m - descent_rate_mps * frame_dt_s * f;
    }

    for (int f = 0; f < n_frames; ++f) {
        GrayImage frame(w, h);
        RippleWarp warp{rippled ? spec.ripple_amp_px : 0.0, spec.ripple_wavelength_px,
                        kRipplePhaseStep * f};
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                Vec2 px{static_cast<double>(x), static_cast<double>(y)};
                if (rippled) px = px + warp.offset(px);
                frame.at(x, y) =
                    static_cast<float>(std::clamp(rigid_sample(spec, depths[f], px), 0.0, 1.0));
            }
        }
        seq.frames.push_back(std::move(frame));
    }

    const std::vector<Vec2> samples = sample_grid(w, h, sample_stride, sample_margin);
    const CameraIntrinsics& k = spec.camera;

    for (int f = 0; f + 1 < n_frames; ++f) {
        const double dz = depths[f] - depths[f + 1];
        RippleWarp warp_now{rippled ? spec.ripple_amp_px : 0.0, spec.ripple_wavelength_px,
                            kRipplePhaseStep * f};
        RippleWarp warp_next{rippled ? spec.ripple_amp_px : 0.0, spec.ripple_wavelength_px,
                             kRipplePhaseStep * (f + 1)};

        FlowField flow;
        flow.frame_width = w;
        flow.frame_height = h;
        flow.points = samples;
        flow.displacements.assign(samples.size(), Vec2{});
        flow.valid.assign(samples.size(), 0);

        for (size_t i = 0; i < samples.size(); ++i) {
            const Vec2& p = samples[i];
            Vec2 rigid_px = rippled ? p + warp_now.offset(p) : p;
            double rx = (rigid_px.x - k.cx) / k.fx;
            double ry = (rigid_px.y - k.cy) / k.fy;
            double t = hit_depth(spec, depths[f], 0.0, rx, ry);
            if (t <= 0.0) continue;
            Vec3 s{t * rx, t * ry, t};
            double z_next = s.z - dz;
            if (z_next <= 1e-6) continue;
            // Occlusion in the next frame.
            double t_next = hit_depth(spec, depths[f + 1], 0.0, s.x / z_next, s.y / z_next);
            if (t_next > 0.0 && t_next < z_next - 1e-6) continue;
            Vec2 rigid_next{k.fx * s.x / z_next + k.cx, k.fy * s.y / z_next + k.cy};

            Vec2 target = rigid_next;
            if (rippled) {
                // Solve p' + warp_next(p') = rigid_next by fixed point; the
                // warp is a contraction for amp * 2*pi/wavelength < 1.
                for (int it = 0; it < 50; ++it) {
                    Vec2 next_guess = rigid_next - warp_next.offset(target);
                    if ((next_guess - target).norm() < 1e-12) {
                        target = next_guess;
                        break;
                    }
                    target = next_guess;
                }
            }
            flow.displacements[i] = target - p;
            flow.valid[i] = 1;
        }
        seq.gt_flows.push_back(std::move(flow));
        if (planar) {
            seq.gt_homographies.push_back(planar_gt_homography(spec, depths[f + 1], dz));
        }
    }
    return seq;
}

namespace {

// Seeded Gaussian stream (Box-Muller over splitmix64), deterministic across
// platforms.
class GaussianRng {
public:
    explicit GaussianRng(uint64_t seed) : state_(seed) {}

    double next(double sd) {
        if (have_spare_) {
            have_spare_ = false;
            return spare_ * sd;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a) * sd;
    }

private:
    double uniform() {
        state_ = splitmix64(state_ + 0x632be59bd9b4e019ull);
        return static_cast<double>(state_ >> 11) * 0x1.0p-53;
    }

    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace

std::vector<ImuSample> generate_imu(const std::vector<UnitQuaternion>& trajectory,
                                    double rate_hz, double gyro_noise_sd,
                                    double accel_noise_sd, uint64_t seed) {
    if (trajectory.size() < 2) throw InputError("trajectory needs at least 2 poses");
    if (!(rate_hz > 0.0)) throw InputError("sample rate must be positive");
    if (!(gyro_noise_sd >= 0.0) || !(accel_noise_sd >= 0.0)) {
        throw InputError("noise levels must be >= 0");
    }
    const double dt = 1.0 / rate_hz;
    GaussianRng rng(seed);
    std::vector<ImuSample> samples;
    samples.reserve(trajectory.size() - 1);
    for (size_t i = 1; i < trajectory.size(); ++i) {
        UnitQuaternion dq = quaternion_multiply(trajectory[i - 1].conjugate(), trajectory[i]);
        if (dq.w < 0.0) dq = {-dq.w, -dq.x, -dq.y, -dq.z};
        double vnorm = std::sqrt(dq.x * dq.x + dq.y * dq.y + dq.z * dq.z);
        Vec3 omega{};
        if (vnorm > 1e-14) {
            double angle = 2.0 * std::atan2(vnorm, dq.w);
            omega = Vec3{dq.x, dq.y, dq.z} * (angle / (vnorm * dt));
        }
        Vec3 accel = rotate_vector(trajectory[i].conjugate(), Vec3{0, 0, kGravity});
        ImuSample s;
        s.gyro = omega + Vec3{rng.next(gyro_noise_sd), rng.next(gyro_noise_sd),
                              rng.next(gyro_noise_sd)};
        s.accel = accel + Vec3{rng.next(accel_noise_sd), rng.next(accel_noise_sd),
                               rng.next(accel_noise_sd)};
        s.dt = dt;
        samples.push_back(s);
    }
    return samples;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    SceneSpec spec;
    bool cx_set = false, cy_set = false;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw InputError(path.string() + ": line " + std::to_string(lineno) +
                             " is not key = value");
        }
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        auto num = [&](const char* what) {
            try {
                size_t pos = 0;
                double v = std::stod(value, &pos);
                if (pos != value.size()) throw std::invalid_argument(value);
                return v;
            } catch (const std::exception&) {
                throw InputError(path.string() + ": bad numeric value for " +
                                 std::string(what));
            }
        };
        if (key == "kind") spec.kind = scene_kind_from_string(value);
        else if (key == "depth_m") spec.depth_m = num("depth_m");
        else if (key == "ramp_deg") spec.ramp_deg = num("ramp_deg");
        else if (key == "box_w") spec.box_w = num("box_w");
        else if (key == "box_d") spec.box_d = num("box_d");
        else if (key == "box_h") spec.box_h = num("box_h");
        else if (key == "step_h") spec.step_h = num("step_h");
        else if (key == "ripple_amp_px") spec.ripple_amp_px = num("ripple_amp_px");
        else if (key == "ripple_wavelength_px") spec.ripple_wavelength_px = num("ripple_wavelength_px");
        else if (key == "seed") spec.texture_seed = static_cast<uint32_t>(num("seed"));
        else if (key == "fx") spec.camera.fx = num("fx");
        else if (key == "fy") spec.camera.fy = num("fy");
        else if (key == "cx") { spec.camera.cx = num("cx"); cx_set = true; }
        else if (key == "cy") { spec.camera.cy = num("cy"); cy_set = true; }
        else if (key == "baseline") spec.camera.baseline = num("baseline");
        else if (key == "width") spec.width = static_cast<int>(num("width"));
        else if (key == "height") spec.height = static_cast<int>(num("height"));
        else throw InputError(path.string() + ": unknown scene key: " + key);
    }
    if (!cx_set) spec.camera.cx = 0.5 * (spec.width - 1);
    if (!cy_set) spec.camera.cy = 0.5 * (spec.height - 1);
    spec.validate();
    return spec;
}

}  // namespace lzeval
