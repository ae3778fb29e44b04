#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lzeval/image_io.hpp"
#include "lzeval/pipeline.hpp"
#include "lzeval/simulator.hpp"
#include "test_helpers.hpp"

using namespace lzeval;
namespace tt = lzeval::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

SceneSpec small_scene(SceneKind kind) {
    SceneSpec spec;
    spec.kind = kind;
    spec.width = 320;
    spec.height = 240;
    spec.camera.cx = 159.5;
    spec.camera.cy = 119.5;
    spec.texture_seed = 41;
    return spec;
}

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.camera.cx = 159.5;
    cfg.camera.cy = 119.5;
    return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config defaults pass validation; bad values fail") {
    PipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.mono.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = PipelineConfig{};
    cfg.bm.block = 4;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = PipelineConfig{};
    cfg.footprint_m = 0.2;
    CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("config files override defaults; unknown keys are hard errors") {
    tt::TempDir dir("config");
    {
        std::ofstream out(dir.path / "c.cfg");
        out << "# pipeline overrides\n";
        out << "flow.stride = 10\n";
        out << "mono.threshold = 2.5\n";
        out << "stereo.max_disp = 32\n";
        out << "stereo.lr_check = false\n";
        out << "decision.slope_max_deg = 12 # inline comment\n";
    }
    PipelineConfig cfg = load_config(dir.path / "c.cfg");
    CHECK(cfg.mono.stride == 10);
    CHECK(cfg.mono.threshold == 2.5);
    CHECK(cfg.bm.max_disp == 32);
    CHECK_FALSE(cfg.lr_check);
    CHECK(cfg.slope_max_deg == 12.0);

    {
        std::ofstream out(dir.path / "typo.cfg");
        out << "decision.slope_max_dg = 12\n";
    }
    CHECK_THROWS_AS(load_config(dir.path / "typo.cfg"), InputError);
    {
        std::ofstream out(dir.path / "badval.cfg");
        out << "flow.stride = fast\n";
    }
    CHECK_THROWS_AS(load_config(dir.path / "badval.cfg"), InputError);
    {
        std::ofstream out(dir.path / "viol.cfg");
        out << "mono.alpha = 1.5\n";
    }
    CHECK_THROWS_AS(load_config(dir.path / "viol.cfg"), InputError);
}

TEST_CASE("run_mono: verdicts, log format, reproducibility") {
    tt::TempDir dir("run_mono");
    MonoSequence rigid = render_mono_sequence(small_scene(SceneKind::FlatPlane), 5, 0.25, 0.1);
    PipelineConfig cfg = small_config();
    MonoRunResult res = run_mono(rigid.frames, cfg, dir.path / "a");
    CHECK(res.safe);
    REQUIRE(res.log.size() == 4);
    CHECK(res.log.back().valid_points > 100);

    std::string log = slurp(dir.path / "a" / "mono_log.csv");
    CHECK(log.rfind("frame_index,raw_error_px,filtered_error_px,valid_points,safe\n", 0) == 0);
    CHECK(log.back() == '\n');

    run_mono(rigid.frames, cfg, dir.path / "b");
    CHECK(slurp(dir.path / "b" / "mono_log.csv") == log);  // byte-for-byte

    MonoSequence ripple =
        render_mono_sequence(small_scene(SceneKind::RippleSurface), 5, 0.25, 0.1);
    MonoRunResult res2 = run_mono(ripple.frames, cfg, dir.path / "c");
    CHECK_FALSE(res2.safe);

    CHECK_THROWS_AS(run_mono({rigid.frames[0]}, cfg, dir.path / "d"), InputError);
    std::vector<GrayImage> mixed{rigid.frames[0], GrayImage(100, 80, 0.5f)};
    CHECK_THROWS_AS(run_mono(mixed, cfg, dir.path / "e"), InputError);
}

TEST_CASE("verdict round trip through the mono log") {
    tt::TempDir dir("verdict_mono");
    MonoSequence ripple =
        render_mono_sequence(small_scene(SceneKind::RippleSurface), 4, 0.25, 0.1);
    PipelineConfig cfg = small_config();
    MonoRunResult res = run_mono(ripple.frames, cfg, dir.path);
    std::optional<bool> parsed = mono_verdict_from_log(dir.path / "mono_log.csv");
    REQUIRE(parsed.has_value());
    CHECK(*parsed == res.safe);
}

TEST_CASE("run_stereo writes every artifact and decides correctly") {
    tt::TempDir dir("run_stereo");
    StereoScene flat = render_stereo(small_scene(SceneKind::FlatPlane));
    PipelineConfig cfg = small_config();
    StereoRunResult res = run_stereo(flat.left, flat.right, {}, cfg, dir.path);
    CHECK(res.decision.safe);
    CHECK(res.warnings.size() == 1);  // empty IMU stream
    CHECK(res.up.z == doctest::Approx(-1.0));
    CHECK(fs::exists(dir.path / "disparity.pfm"));
    CHECK(fs::exists(dir.path / "overlay.ppm"));
    CHECK(fs::exists(dir.path / "report.json"));

    std::optional<bool> parsed = stereo_verdict_from_report(dir.path / "report.json");
    REQUIRE(parsed.has_value());
    CHECK(*parsed);

    // The saved PFM round-trips to the in-memory disparity map.
    FloatRaster raster = load_pfm(dir.path / "disparity.pfm");
    CHECK(raster.width == res.disparity.width);
    CHECK(raster.data == res.disparity.d);

    StereoScene box = render_stereo(small_scene(SceneKind::BoxOnPlane));
    StereoRunResult res2 = run_stereo(box.left, box.right, {}, cfg, dir.path / "box");
    CHECK_FALSE(res2.decision.safe);
    CHECK(res2.decision.reason == DecisionReason::Roughness);

    StereoScene bare = render_stereo(small_scene(SceneKind::Textureless));
    StereoRunResult res3 = run_stereo(bare.left, bare.right, {}, cfg, dir.path / "tex");
    CHECK_FALSE(res3.decision.safe);
    CHECK(res3.decision.reason == DecisionReason::InsufficientData);

    CHECK_THROWS_AS(run_stereo(flat.left, GrayImage(100, 80, 0.5f), {}, cfg, dir.path / "x"),
                    InputError);
}

TEST_CASE("run_stereo consumes the IMU stream for gravity alignment") {
    tt::TempDir dir("stereo_imu");
    StereoScene flat = render_stereo(small_scene(SceneKind::FlatPlane));
    PipelineConfig cfg = small_config();
    // Static nadir attitude: body z looks down, so body-frame up is -z.
    UnitQuaternion nadir = UnitQuaternion::from_axis_angle({1, 0, 0}, M_PI);
    std::vector<UnitQuaternion> traj(501, nadir);
    std::vector<ImuSample> imu = generate_imu(traj, 100.0, 0.002, 0.05, 3);
    StereoRunResult res = run_stereo(flat.left, flat.right, imu, cfg, dir.path);
    CHECK(res.warnings.empty());
    CHECK(res.up.z == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(res.decision.safe);
}

TEST_CASE("stereo runs are reproducible byte for byte") {
    tt::TempDir dir("stereo_repro");
    StereoScene flat = render_stereo(small_scene(SceneKind::FlatPlane));
    PipelineConfig cfg = small_config();
    run_stereo(flat.left, flat.right, {}, cfg, dir.path / "a");
    run_stereo(flat.left, flat.right, {}, cfg, dir.path / "b");
    for (const char* name : {"disparity.pfm", "overlay.ppm", "report.json"}) {
        CHECK(slurp(dir.path / "a" / name) == slurp(dir.path / "b" / name));
    }
}

TEST_CASE("grid report JSON carries the documented fields") {
    StereoScene flat = render_stereo(small_scene(SceneKind::FlatPlane));
    PipelineConfig cfg = small_config();
    tt::TempDir dir("report");
    StereoRunResult res = run_stereo(flat.left, flat.right, {}, cfg, dir.path);
    std::string json = grid_report_json(res.grid, res.decision);
    CHECK(json.find("\"cell_size\": 0.5") != std::string::npos);
    CHECK(json.find("\"nadir_cell\"") != std::string::npos);
    CHECK(json.find("\"slope_deg\"") != std::string::npos);
    CHECK(json.find("\"roughness_m\"") != std::string::npos);
    CHECK(json.find("\"verdict\"") != std::string::npos);
    CHECK(json.find("\"reason\": \"none\"") != std::string::npos);
}

TEST_CASE("run_bench scores scenes and tolerates malformed ones") {
    tt::TempDir dir("bench");
    PipelineConfig cfg = small_config();
    for (const char* name : {"alpha", "beta"}) {
        SceneSpec spec = small_scene(name[0] == 'a' ? SceneKind::FlatPlane : SceneKind::Ramp);
        StereoScene scene = render_stereo(spec);
        fs::create_directories(dir.path / "data" / name);
        save_pgm(scene.left, dir.path / "data" / name / "left.pgm");
        save_pgm(scene.right, dir.path / "data" / name / "right.pgm");
        save_pfm({spec.width, spec.height, scene.gt.disparity.d},
                 dir.path / "data" / name / "gt.pfm");
    }
    fs::create_directories(dir.path / "data" / "broken");  // missing files

    std::vector<BenchRow> rows = run_bench(dir.path / "data", cfg, 4.0, false, dir.path / "out");
    REQUIRE(rows.size() == 3);
    int scored = 0, failed = 0;
    for (const BenchRow& row : rows) {
        if (row.error.empty()) {
            CHECK(row.bm_bad_pct >= 0.0);
            CHECK(row.bm_bad_pct <= 100.0);
            CHECK(row.bm_bad_pct < 10.0);
            ++scored;
        } else {
            CHECK(row.scene == "broken");
            ++failed;
        }
    }
    CHECK(scored == 2);
    CHECK(failed == 1);
    std::string csv = slurp(dir.path / "out" / "bench.csv");
    CHECK(csv.rfind("scene,bm_bad_pct,bm_lrc_bad_pct,error\n", 0) == 0);

    std::vector<BenchRow> inject =
        run_bench(dir.path / "data", cfg, 4.0, true, dir.path / "out2");
    for (const BenchRow& row : inject) {
        if (row.error.empty()) {
            CHECK(row.bm_bad_pct == 0.0);
            CHECK(row.bm_lrc_bad_pct == 0.0);
        }
    }

    fs::create_directories(dir.path / "empty");
    CHECK_THROWS_AS(run_bench(dir.path / "empty", cfg, 4.0, false, dir.path / "out3"),
                    InputError);
}

TEST_CASE("combine implements the conservative AND") {
    CHECK(combine(true, true).overall);
    CHECK_FALSE(combine(false, true).overall);
    CHECK_FALSE(combine(true, false).overall);
    CHECK_FALSE(combine(std::nullopt, false).overall);
    CHECK(combine(std::nullopt, true).overall);
    CHECK(combine(true, std::nullopt).overall);
    CHECK_THROWS_AS(combine(std::nullopt, std::nullopt), InputError);

    CombinedVerdict water = combine(false, true);  // water: flat to stereo, non-rigid to mono
    REQUIRE(water.reasons.size() == 1);
    CHECK(water.reasons[0] == "mono_unsafe");
}

TEST_CASE("combine is monotone in its inputs") {
    const std::optional<bool> states[] = {std::nullopt, true, false};
    auto leq = [](std::optional<bool> a, std::optional<bool> b) {
        // a is at most as safe as b
        if (a.has_value() && !*a) return true;
        if (!a.has_value()) return !b.has_value() || *b;
        return b.has_value() && *b;
    };
    for (auto m1 : states) {
        for (auto s1 : states) {
            if (!m1 && !s1) continue;
            for (auto m2 : states) {
                for (auto s2 : states) {
                    if (!m2 && !s2) continue;
                    if (leq(m1, m2) && leq(s1, s2)) {
                        if (combine(m1, s1).overall) CHECK(combine(m2, s2).overall);
                    }
                }
            }
        }
    }
}

TEST_CASE("flow CSV round trip") {
    tt::TempDir dir("flow_csv");
    FlowField flow;
    flow.frame_width = 100;
    flow.frame_height = 80;
    flow.points = {{10, 10}, {30, 10}, {10, 30}, {30, 30}};
    flow.displacements = {{0.5, -0.25}, {0, 0}, {1.5, 2.5}, {0, 0}};
    flow.valid = {1, 0, 1, 1};
    write_flow_csv(flow, dir.path / "f.csv");
    FlowField back = load_flow_csv(dir.path / "f.csv");
    REQUIRE(back.size() == flow.size());
    for (size_t i = 0; i < flow.size(); ++i) {
        CHECK(back.points[i].x == flow.points[i].x);
        CHECK(back.displacements[i].y == flow.displacements[i].y);
        CHECK(back.valid[i] == flow.valid[i]);
    }
}

}  // TEST_SUITE

#ifdef LZEVAL_CLI_PATH

namespace {

struct CliResult {
    int exit_code;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(LZEVAL_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe)) output += buf;
    int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate/stereo/mono/combine end to end with spec'd exit codes") {
    tt::TempDir dir("cli");
    {
        std::ofstream out(dir.path / "flat.scene");
        out << "kind = flat_plane\nwidth = 320\nheight = 240\nseed = 4\n";
    }
    {
        std::ofstream out(dir.path / "ripple.scene");
        out << "kind = ripple_surface\nwidth = 320\nheight = 240\nseed = 4\n"
            << "ripple_amp_px = 2\n";
    }
    {
        std::ofstream out(dir.path / "pipe.cfg");
        out << "camera.cx = 159.5\ncamera.cy = 119.5\n";
    }
    const std::string scene_dir = (dir.path / "scene").string();
    const std::string cfg = " --config " + (dir.path / "pipe.cfg").string();

    CliResult sim = run_cli("simulate --scene " + (dir.path / "flat.scene").string() +
                            " --out " + scene_dir + " --mono-frames 5 --imu-seconds 1");
    CHECK(sim.exit_code == 0);

    CliResult st = run_cli("stereo --left " + scene_dir + "/left.pgm --right " + scene_dir +
                           "/right.pgm --imu " + scene_dir + "/imu.csv" + cfg + " --out " +
                           (dir.path / "st").string());
    CHECK(st.exit_code == 0);
    CHECK(st.output.find("stereo: safe") != std::string::npos);

    CliResult mono = run_cli("mono " + scene_dir + "/frame_000.pgm " + scene_dir +
                             "/frame_001.pgm " + scene_dir + "/frame_002.pgm " + cfg +
                             " --out " + (dir.path / "mn").string());
    CHECK(mono.exit_code == 0);

    const std::string ripple_dir = (dir.path / "ripple").string();
    run_cli("simulate --scene " + (dir.path / "ripple.scene").string() + " --out " +
            ripple_dir + " --mono-frames 5");
    CliResult mono2 = run_cli("mono " + ripple_dir + "/frame_000.pgm " + ripple_dir +
                              "/frame_001.pgm " + ripple_dir + "/frame_002.pgm " + cfg +
                              " --out " + (dir.path / "mn2").string());
    CHECK(mono2.exit_code == 1);  // evaluated unsafe
    CHECK(mono2.output.find("mono: unsafe") != std::string::npos);

    CliResult comb = run_cli("combine --mono-log " + (dir.path / "mn2").string() +
                             "/mono_log.csv --stereo-report " + (dir.path / "st").string() +
                             "/report.json");
    CHECK(comb.exit_code == 1);
    CHECK(comb.output.find("combined: unsafe") != std::string::npos);
    CHECK(comb.output.find("mono_unsafe") != std::string::npos);
}

TEST_CASE("CLI error paths exit 2 with a single-line reason") {
    tt::TempDir dir("cli_err");
    CliResult one_frame = run_cli("mono missing.pgm");
    CHECK(one_frame.exit_code == 2);

    CliResult missing = run_cli("stereo --left nope.pgm --right nada.pgm --out " +
                                (dir.path / "o").string());
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.rfind("error: ", 0) == 0);
    CHECK(std::count(missing.output.begin(), missing.output.end(), '\n') == 1);

    {
        std::ofstream out(dir.path / "typo.cfg");
        out << "stereo.blok = 11\n";
    }
    CliResult badcfg = run_cli("combine --mono-log x.csv --stereo-report y.json");
    CHECK(badcfg.exit_code == 2);

    CliResult empty_bench =
        run_cli("bench --dataset " + (dir.path / "nonexistent").string());
    CHECK(empty_bench.exit_code == 2);
}

TEST_CASE("CLI runs are byte-for-byte reproducible") {
    tt::TempDir dir("cli_repro");
    {
        std::ofstream out(dir.path / "flat.scene");
        out << "kind = flat_plane\nwidth = 320\nheight = 240\nseed = 11\n";
    }
    std::string a = (dir.path / "a").string();
    std::string b = (dir.path / "b").string();
    CHECK(run_cli("simulate --scene " + (dir.path / "flat.scene").string() + " --out " + a)
              .exit_code == 0);
    CHECK(run_cli("simulate --scene " + (dir.path / "flat.scene").string() + " --out " + b)
              .exit_code == 0);
    for (const char* name : {"left.pgm", "right.pgm", "gt.pfm"}) {
        CHECK(slurp(fs::path(a) / name) == slurp(fs::path(b) / name));
    }
}

}  // TEST_SUITE

#endif  // LZEVAL_CLI_PATH
