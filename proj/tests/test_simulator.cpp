#include <doctest.h>

#include <fstream>

#include "lzeval/simulator.hpp"
#include "lzeval/terrain.hpp"
#include "test_helpers.hpp"

using namespace lzeval;
namespace tt = lzeval::testing;

namespace {

SceneSpec base_scene(SceneKind kind, int w = 320, int h = 240) {
    SceneSpec spec;
    spec.kind = kind;
    spec.width = w;
    spec.height = h;
    spec.camera.cx = 0.5 * (w - 1);
    spec.camera.cy = 0.5 * (h - 1);
    spec.texture_seed = 31;
    return spec;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("flat plane at 2 m has constant disparity fx*B/Z = 24") {
    SceneSpec spec = base_scene(SceneKind::FlatPlane);
    StereoScene scene = render_stereo(spec);
    size_t valid = 0;
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            if (!scene.gt.disparity.is_valid(x, y)) continue;
            CHECK(scene.gt.disparity.at(x, y) == 24.0f);
            ++valid;
        }
    }
    // Only the strip not visible from the right camera is missing.
    CHECK(valid > size_t(spec.width - 26) * spec.height);
    CHECK(scene.gt.safe_label);
    REQUIRE(scene.gt.constant_slope_deg.has_value());
    CHECK(*scene.gt.constant_slope_deg == 0.0);
}

TEST_CASE("ramp ground truth slope is exact by construction") {
    SceneSpec spec = base_scene(SceneKind::Ramp);
    spec.ramp_deg = 20.0;
    StereoScene scene = render_stereo(spec);
    REQUIRE(scene.gt.constant_slope_deg.has_value());
    CHECK(*scene.gt.constant_slope_deg == doctest::Approx(20.0).epsilon(1e-9));

    // Cross-check: unproject the analytic disparity and fit planes.
    PointCloud cloud = build_point_cloud(scene.gt.disparity, spec.camera, {0, 0, -1}, 30.0);
    GridMap grid = bin_and_fit(cloud, 0.5, 20);
    int checked = 0;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            if (!grid.at(i, j)) continue;
            CHECK(grid.at(i, j)->slope_deg == doctest::Approx(20.0).epsilon(0.02));
            CHECK(grid.at(i, j)->roughness_m < 0.005);
            ++checked;
        }
    }
    CHECK(checked >= 4);
}

TEST_CASE("textureless scenes are constant and labeled unsafe") {
    SceneSpec spec = base_scene(SceneKind::Textureless);
    StereoScene scene = render_stereo(spec);
    for (float v : scene.left.data) CHECK(v == scene.left.data[0]);
    for (float v : scene.right.data) CHECK(v == scene.right.data[0]);
    CHECK_FALSE(scene.gt.safe_label);
}

TEST_CASE("box scene: occluded strip is marked invalid in the ground truth") {
    SceneSpec spec = base_scene(SceneKind::BoxOnPlane);
    StereoScene scene = render_stereo(spec);
    CHECK_FALSE(scene.gt.safe_label);
    // The box top stands 0.3 m proud at depth 1.7: disparity fx*B/1.7.
    double top_d = spec.camera.fx * spec.camera.baseline / (spec.depth_m - spec.box_h);
    int cx = spec.width / 2, cy = spec.height / 2;
    CHECK(scene.gt.disparity.at(cx, cy) == doctest::Approx(top_d).epsilon(1e-6));
    // Plane pixels immediately left of the box are shadowed in the right view.
    int box_left_px = int(spec.camera.cx - (0.5 * spec.box_w / spec.depth_m) * spec.camera.fx);
    bool found_occlusion = false;
    for (int x = box_left_px - 12; x < box_left_px; ++x) {
        if (!scene.gt.disparity.is_valid(x, cy)) found_occlusion = true;
    }
    CHECK(found_occlusion);
}

TEST_CASE("rendering is deterministic in spec and seed") {
    SceneSpec spec = base_scene(SceneKind::BoxOnPlane, 160, 120);
    StereoScene a = render_stereo(spec);
    StereoScene b = render_stereo(spec);
    CHECK(a.left == b.left);
    CHECK(a.right == b.right);
    CHECK(a.gt.disparity == b.gt.disparity);
    spec.texture_seed = 32;
    StereoScene c = render_stereo(spec);
    CHECK_FALSE(a.left == c.left);
}

TEST_CASE("scene geometry validation") {
    SceneSpec spec = base_scene(SceneKind::BoxOnPlane);
    spec.box_h = 2.5;  // above the camera
    CHECK_THROWS_AS(render_stereo(spec), InputError);
    spec = base_scene(SceneKind::Ramp);
    spec.ramp_deg = 60.0;
    CHECK_THROWS_AS(render_stereo(spec), InputError);
    spec = base_scene(SceneKind::FlatPlane);
    spec.depth_m = 0.05;
    CHECK_THROWS_AS(render_stereo(spec), InputError);
}

TEST_CASE("descent frames obey the analytic homography") {
    SceneSpec spec = base_scene(SceneKind::FlatPlane);
    MonoSequence seq = render_mono_sequence(spec, 6, 0.25, 0.1);
    REQUIRE(seq.frames.size() == 6);
    REQUIRE(seq.gt_flows.size() == 5);
    REQUIRE(seq.gt_homographies.size() == 5);
    CHECK(seq.safe_label);
    for (size_t k = 0; k < seq.gt_flows.size(); ++k) {
        // The exact flow must satisfy Eq for the exact homography.
        double residual = tt::flow_residual_oracle(seq.gt_flows[k], seq.gt_homographies[k].h);
        CHECK(residual < 1e-9);
    }
}

TEST_CASE("ramp descent also stays planar under its homography") {
    SceneSpec spec = base_scene(SceneKind::Ramp);
    spec.ramp_deg = 12.0;
    MonoSequence seq = render_mono_sequence(spec, 4, 0.3, 0.1);
    REQUIRE(seq.gt_homographies.size() == 3);
    for (size_t k = 0; k < seq.gt_flows.size(); ++k) {
        CHECK(tt::flow_residual_oracle(seq.gt_flows[k], seq.gt_homographies[k].h) < 1e-9);
    }
}

TEST_CASE("zero descent repeats the same frame") {
    SceneSpec spec = base_scene(SceneKind::FlatPlane, 160, 120);
    MonoSequence seq = render_mono_sequence(spec, 3, 0.0, 0.1);
    CHECK(seq.frames[0] == seq.frames[1]);
    CHECK(seq.frames[1] == seq.frames[2]);
}

TEST_CASE("ripple ground-truth flow defeats every homography") {
    SceneSpec spec = base_scene(SceneKind::RippleSurface);
    spec.ripple_amp_px = 2.0;
    MonoSequence seq = render_mono_sequence(spec, 3, 0.25, 0.1);
    CHECK_FALSE(seq.safe_label);
    CHECK(seq.gt_homographies.empty());
    for (const FlowField& flow : seq.gt_flows) {
        Homography best = fit_homography(flow);
        CHECK(homography_error(flow, best) > 0.5);
    }
}

TEST_CASE("descent through the surface is rejected") {
    SceneSpec spec = base_scene(SceneKind::FlatPlane);
    CHECK_THROWS_AS(render_mono_sequence(spec, 30, 1.0, 0.1), InputError);
    CHECK_THROWS_AS(render_mono_sequence(spec, 1, 0.1, 0.1), InputError);
}

TEST_CASE("static IMU stream reads pure gravity") {
    std::vector<UnitQuaternion> traj(11);  // identity poses
    std::vector<ImuSample> samples = generate_imu(traj, 100.0, 0.0, 0.0, 5);
    REQUIRE(samples.size() == 10);
    for (const ImuSample& s : samples) {
        CHECK(s.gyro.norm() == doctest::Approx(0.0));
        CHECK(s.accel.x == doctest::Approx(0.0));
        CHECK(s.accel.y == doctest::Approx(0.0));
        CHECK(s.accel.z == doctest::Approx(kGravity));
        CHECK(s.dt == doctest::Approx(0.01));
    }
}

TEST_CASE("constant-rate spin differentiates to the body rate") {
    const double rate = 100.0;
    const double omega = M_PI / 2;
    std::vector<UnitQuaternion> traj;
    for (int i = 0; i <= 50; ++i) {
        traj.push_back(UnitQuaternion::from_axis_angle({0, 0, 1}, omega * i / rate));
    }
    std::vector<ImuSample> samples = generate_imu(traj, rate, 0.0, 0.0, 5);
    for (const ImuSample& s : samples) {
        CHECK(s.gyro.x == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(s.gyro.y == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(s.gyro.z == doctest::Approx(omega).epsilon(1e-9));
    }
}

TEST_CASE("noisy static stream converges the Madgwick filter") {
    std::vector<UnitQuaternion> traj(1001);  // 10 s at 100 Hz, identity
    std::vector<ImuSample> samples = generate_imu(traj, 100.0, 0.002, 0.05, 17);
    OrientationState st;
    st.q = UnitQuaternion::from_axis_angle({0, 1, 0}, 30.0 * M_PI / 180.0);
    for (const ImuSample& s : samples) st = madgwick_update(st, s);
    Vec3 up = gravity_up(st);
    double err_deg = std::acos(std::clamp(up.z, -1.0, 1.0)) * 180.0 / M_PI;
    CHECK(err_deg < 1.0);
}

TEST_CASE("imu generation rejects bad inputs") {
    std::vector<UnitQuaternion> one(1);
    CHECK_THROWS_AS(generate_imu(one, 100.0, 0.0, 0.0, 1), InputError);
    std::vector<UnitQuaternion> two(2);
    CHECK_THROWS_AS(generate_imu(two, 0.0, 0.0, 0.0, 1), InputError);
}

TEST_CASE("matcher self-consistency on textured rigid scenes") {
    for (SceneKind kind : {SceneKind::FlatPlane, SceneKind::Ramp, SceneKind::BoxOnPlane}) {
        CAPTURE(to_string(kind));
        SceneSpec spec = base_scene(kind);
        StereoScene scene = render_stereo(spec);
        BlockMatchParams p;
        DisparityMap est = compute_disparity(scene.left, scene.right, p);
        CHECK(bad_pixel_rate(est, scene.gt.disparity, 4.0) < 10.0);
    }
}

TEST_CASE("classification over analytic clouds reproduces the scene labels") {
    struct Case {
        SceneKind kind;
        double param;
        bool want_safe;
    };
    const Case cases[] = {
        {SceneKind::FlatPlane, 0.0, true},   {SceneKind::Ramp, 10.0, true},
        {SceneKind::Ramp, 25.0, false},      {SceneKind::BoxOnPlane, 0.3, false},
        {SceneKind::Textureless, 0.0, false},
    };
    for (const Case& c : cases) {
        CAPTURE(to_string(c.kind));
        CAPTURE(c.param);
        SceneSpec spec = base_scene(c.kind);
        if (c.kind == SceneKind::Ramp) spec.ramp_deg = c.param;
        if (c.kind == SceneKind::BoxOnPlane) spec.box_h = c.param;
        StereoScene scene = render_stereo(spec);
        CHECK(scene.gt.safe_label == c.want_safe);

        // Through the matcher and grid, textureless ends with an empty grid.
        BlockMatchParams p;
        DisparityMap est = compute_disparity(scene.left, scene.right, p);
        PointCloud cloud = build_point_cloud(est, spec.camera, {0, 0, -1}, 20.0);
        GridMap grid = bin_and_fit(cloud, 0.5, 20);
        LandingDecision dec = classify_footprint(grid, 15.0, 0.05, 1.0);
        CHECK(dec.safe == c.want_safe);
    }
}

TEST_CASE("scene spec files load with defaults and reject unknown keys") {
    tt::TempDir dir("scene_spec");
    {
        std::ofstream out(dir.path / "s.txt");
        out << "# comment line\n";
        out << "kind = ramp\n";
        out << "ramp_deg = 17.5\n";
        out << "width = 320\nheight = 240\n";
        out << "seed = 9\n";
    }
    SceneSpec spec = load_scene_spec(dir.path / "s.txt");
    CHECK(spec.kind == SceneKind::Ramp);
    CHECK(spec.ramp_deg == 17.5);
    CHECK(spec.texture_seed == 9);
    CHECK(spec.camera.cx == doctest::Approx(159.5));  // centered by default

    {
        std::ofstream out(dir.path / "bad.txt");
        out << "kind = flat_plane\nwobble = 3\n";
    }
    CHECK_THROWS_AS(load_scene_spec(dir.path / "bad.txt"), InputError);
    {
        std::ofstream out(dir.path / "kind.txt");
        out << "kind = lake\n";
    }
    CHECK_THROWS_AS(load_scene_spec(dir.path / "kind.txt"), InputError);
}

}  // TEST_SUITE
