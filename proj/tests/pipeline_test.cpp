#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "tiledbeam/io.hpp"
#include "tiledbeam/pipeline.hpp"

using namespace tiledbeam;
namespace fs = std::filesystem;

namespace {

// Shrunk end-to-end configuration: 32 elements, 4 subbands, runs in
// milliseconds.
RunConfig small_config() {
    RunConfig cfg = default_config("desk");
    cfg.layout = ArrayLayout{2, 2, 2, 4, 10e9};

    Scenario sc;
    sc.waveform.samples_per_pulse = 64;
    sc.waveform.n_subbands = 4;
    sc.waveform.pulses_per_cpi = 8;
    sc.targets.push_back({{0.25, 0.1}, 40.0, 20.0, 0.0});
    sc.targets.push_back({{-0.4, 0.2}, 90.0, -45.0, 0.0});
    sc.interferers.push_back({{0.6, -0.1}, 40.0});
    cfg.scenario = sc;

    cfg.window_z = 2;
    cfg.window_x = 2;
    cfg.single_window_z = 2;
    cfg.single_window_x = 4;
    cfg.output_dir = "";
    cfg.seed = 321;
    return cfg;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() /
               ("tiledbeam_" + tag + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const ModeRun& find_mode(const RunResult& res, ProcessingMode m) {
    for (const ModeRun& mr : res.modes) {
        if (mr.mode == m) return mr;
    }
    REQUIRE(false);
    return res.modes.front();
}

}  // namespace

TEST_CASE("built-in profiles validate") {
    const RunConfig desk = default_config("desk");
    CHECK_NOTHROW(desk.validate());
    CHECK(desk.layout.total_elems() == 256);
    CHECK(desk.scenario.name == "A1-like");
    // The desk tile is 2x16, so the 16-coefficient baseline window is
    // reshaped to fit it.
    CHECK(desk.single_window_z == 2);
    CHECK(desk.single_window_x == 8);
    CHECK(desk.single_window_z * desk.single_window_x == 16);

    const RunConfig field = default_config("field");
    CHECK_NOTHROW(field.validate());
    CHECK(field.layout.elems_z == 4);
    CHECK(field.layout.elems_x == 32);
    CHECK(field.scenario.waveform.n_subbands == 32);
    CHECK(field.single_window_z == 4);
    CHECK(field.single_window_x == 4);

    CHECK_THROWS_AS(default_config("garage"), std::invalid_argument);
}

TEST_CASE("mode names round-trip") {
    for (ProcessingMode m :
         {ProcessingMode::oracle_full, ProcessingMode::single_beamspace,
          ProcessingMode::tiled_beamspace}) {
        CHECK(mode_from_name(mode_name(m)) == m);
    }
    CHECK_THROWS_AS(mode_from_name("hybrid"), std::invalid_argument);
}

TEST_CASE("config validation points at the offending field") {
    RunConfig cfg = small_config();
    cfg.window_z = 3;  // tile z extent is 2
    CHECK_THROWS_WITH_AS(cfg.validate(),
                         "processing.window.z: must lie in [1, elems_z]",
                         std::invalid_argument);

    cfg = small_config();
    cfg.single_window_x = 9;
    CHECK_THROWS_WITH_AS(cfg.validate(),
                         "processing.single_window.x: must lie in [1, elems_x]",
                         std::invalid_argument);

    cfg = small_config();
    cfg.modes = {ProcessingMode::tiled_beamspace,
                 ProcessingMode::tiled_beamspace};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = small_config();
    cfg.modes.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = small_config();
    cfg.snapshot_budget = -5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = small_config();
    cfg.designated_target = 7;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = small_config();
    cfg.parallelism = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("json configs layer over the named profile") {
    const RunConfig base = config_from_json("{}");
    CHECK(config_to_json(base) == config_to_json(default_config("desk")));

    const RunConfig windowed = config_from_json(
        R"({"processing": {"window": {"x": 4}}})");
    CHECK(windowed.window_x == 4);
    CHECK(windowed.window_z == 2);

    const RunConfig named = config_from_json(
        R"({"scenario": {"name": "E2-like", "scale": 0.5}})");
    CHECK(named.scenario.name == "E2-like");
    CHECK(named.scenario.interferers.size() == 8);
    CHECK(named.scenario.targets[0].range_m == doctest::Approx(27.5));

    const RunConfig inline_scene = config_from_json(R"({
        "scenario": {"targets": [
            {"azimuth_deg": 30.0, "elevation_deg": 0.0, "range_m": 80.0}
        ]},
        "processing": {"modes": ["tiled"]},
        "run": {"seed": 9}
    })");
    CHECK(inline_scene.scenario.name == "inline");
    CHECK(inline_scene.scenario.targets.size() == 1);
    CHECK(inline_scene.scenario.targets[0].angle.azimuth_rad ==
          doctest::Approx(0.5235987755982988));
    CHECK(inline_scene.modes ==
          std::vector<ProcessingMode>{ProcessingMode::tiled_beamspace});
    CHECK(inline_scene.seed == 9);
}

TEST_CASE("json config errors carry a field path") {
    CHECK_THROWS_AS(config_from_json("not json"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"profile": "attic"})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        config_from_json(R"({"scenario": {"scale": 2.0}})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        config_from_json(R"({"processing": {"modes": ["warp"]}})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        config_from_json(R"({"processing": {"window": {"z": 40}}})"),
        std::invalid_argument);
}

TEST_CASE("rendered configs parse back to the same run") {
    RunConfig cfg = small_config();
    cfg.scenario.name = "inline";
    const std::string once = config_to_json(cfg);
    CHECK(config_to_json(cfg) == once);  // rendering is deterministic

    const RunConfig back = config_from_json(once);
    CHECK(back.scenario.name == "inline");
    REQUIRE(back.scenario.targets.size() == cfg.scenario.targets.size());
    for (std::size_t k = 0; k < cfg.scenario.targets.size(); ++k) {
        // Angles pass through a degree rendering; everything else is
        // carried verbatim.
        CHECK(back.scenario.targets[k].angle.azimuth_rad ==
              doctest::Approx(cfg.scenario.targets[k].angle.azimuth_rad)
                  .epsilon(1e-12));
        CHECK(back.scenario.targets[k].range_m ==
              cfg.scenario.targets[k].range_m);
        CHECK(back.scenario.targets[k].velocity_mps ==
              cfg.scenario.targets[k].velocity_mps);
    }
    CHECK(back.scenario.interferers.size() ==
          cfg.scenario.interferers.size());
    CHECK(back.modes == cfg.modes);
    CHECK(back.window_x == cfg.window_x);
    CHECK(back.single_window_x == cfg.single_window_x);
    CHECK(back.loading_factor == cfg.loading_factor);
    CHECK(back.seed == cfg.seed);
    CHECK(back.scenario.waveform.samples_per_pulse ==
          cfg.scenario.waveform.samples_per_pulse);
}

TEST_CASE("a run solves each mode at its own dimension and budget") {
    const RunConfig cfg = small_config();
    const RunResult res = run(cfg);
    REQUIRE(res.modes.size() == 3);
    REQUIRE(res.truth.targets.size() == 2);

    const ModeRun& oracle = find_mode(res, ProcessingMode::oracle_full);
    const ModeRun& single = find_mode(res, ProcessingMode::single_beamspace);
    const ModeRun& tiled = find_mode(res, ProcessingMode::tiled_beamspace);

    CHECK(oracle.dim == 32);      // all 4 tiles x 8 elements
    CHECK(single.dim == 8);       // one tile through its full window
    CHECK(tiled.dim == 16);       // 4 tiles x 2x2 window

    // Training defaults to four times the solved dimension, capped at
    // the 128 snapshots one subband provides.
    CHECK(oracle.snapshots_used == 128);
    CHECK(single.snapshots_used == 32);
    CHECK(tiled.snapshots_used == 64);

    const int n_subbands = cfg.scenario.waveform.n_subbands;
    for (const ModeRun& mr : res.modes) {
        REQUIRE(mr.targets.size() == 2);
        for (const TargetOutcome& out : mr.targets) {
            REQUIRE(static_cast<int>(out.weights.size()) == n_subbands);
            REQUIRE(static_cast<int>(out.condition.size()) == n_subbands);
            const int expect_len =
                mr.mode == ProcessingMode::single_beamspace
                    ? cfg.layout.elems_per_tile()
                    : cfg.layout.total_elems();
            for (const Eigen::VectorXcd& w : out.weights) {
                CHECK(w.size() == expect_len);
            }
            CHECK(std::isfinite(out.output_sinr_db));
            CHECK(std::isfinite(out.detection_sinr_db));
            CHECK(out.mainlobe_deg > 0.0);
            CHECK(out.mainlobe_deg <= 40.0);
        }
    }
}

TEST_CASE("an explicit snapshot budget overrides the default rule") {
    RunConfig cfg = small_config();
    cfg.snapshot_budget = 48;
    const RunResult res = run(cfg);
    for (const ModeRun& mr : res.modes) {
        CHECK(mr.snapshots_used == 48);
    }

    cfg.snapshot_budget = 4096;  // more than the CPI provides
    const RunResult capped = run(cfg);
    for (const ModeRun& mr : capped.modes) {
        CHECK(mr.snapshots_used == 128);
    }
}

TEST_CASE("a designated target narrows the run to one beam") {
    RunConfig cfg = small_config();
    cfg.designated_target = 1;
    const RunResult res = run(cfg);
    for (const ModeRun& mr : res.modes) {
        REQUIRE(mr.targets.size() == 1);
        CHECK(mr.targets[0].target_id == 1);
    }
}

TEST_CASE("modes do not perturb each other") {
    RunConfig lone_cfg = small_config();
    lone_cfg.modes = {ProcessingMode::tiled_beamspace};
    const RunResult lone = run(lone_cfg);

    const RunResult both = run(small_config());
    const ModeRun& a = find_mode(lone, ProcessingMode::tiled_beamspace);
    const ModeRun& b = find_mode(both, ProcessingMode::tiled_beamspace);

    REQUIRE(a.targets.size() == b.targets.size());
    for (std::size_t k = 0; k < a.targets.size(); ++k) {
        CHECK(a.targets[k].detection_sinr_db == b.targets[k].detection_sinr_db);
        CHECK(a.targets[k].output_sinr_db == b.targets[k].output_sinr_db);
        for (std::size_t ell = 0; ell < a.targets[k].weights.size(); ++ell) {
            CHECK((a.targets[k].weights[ell] - b.targets[k].weights[ell])
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("results do not depend on the parallelism level") {
    RunConfig cfg = small_config();
    cfg.parallelism = 1;
    const RunResult serial = run(cfg);
    cfg.parallelism = 4;
    const RunResult fanned = run(cfg);

    REQUIRE(serial.modes.size() == fanned.modes.size());
    for (std::size_t m = 0; m < serial.modes.size(); ++m) {
        const ModeRun& a = serial.modes[m];
        const ModeRun& b = fanned.modes[m];
        REQUIRE(a.targets.size() == b.targets.size());
        for (std::size_t k = 0; k < a.targets.size(); ++k) {
            CHECK(a.targets[k].detection_sinr_db ==
                  b.targets[k].detection_sinr_db);
            CHECK(a.targets[k].mainlobe_deg == b.targets[k].mainlobe_deg);
            for (std::size_t ell = 0; ell < a.targets[k].weights.size();
                 ++ell) {
                CHECK((a.targets[k].weights[ell] - b.targets[k].weights[ell])
                          .cwiseAbs()
                          .maxCoeff() == 0.0);
            }
        }
    }
}

TEST_CASE("artifacts land on disk with a self-consistent manifest") {
    TempDir dir("artifacts");
    RunConfig cfg = small_config();
    cfg.output_dir = dir.path.string();
    cfg.write_cubes = true;
    const RunResult res = run(cfg);

    for (const std::string& f : res.files) {
        CHECK(fs::exists(f));
    }
    CHECK(fs::exists(dir.path / "report.csv"));
    CHECK(fs::exists(dir.path / "detections.csv"));
    CHECK(fs::exists(dir.path / "beams.csv"));
    CHECK(fs::exists(dir.path / "snapshots.cube"));
    CHECK(fs::exists(dir.path / "manifest.json"));

    const nlohmann::json manifest = nlohmann::json::parse(
        read_text_file((dir.path / "manifest.json").string()));
    CHECK(manifest.at("schema_version") == 1);
    CHECK(manifest.at("config_hash") ==
          hash_hex(fnv1a64(config_to_json(cfg))));
    REQUIRE(manifest.at("modes").size() == 3);
    for (const auto& entry : manifest.at("outputs")) {
        const fs::path p = dir.path / entry.at("path").get<std::string>();
        CHECK(hash_hex(hash_file(p.string())) ==
              entry.at("fnv1a64").get<std::string>());
    }

    // One report row per (mode, beam), plus the header.
    std::ifstream is(dir.path / "report.csv");
    int lines = 0;
    std::string line;
    while (std::getline(is, line)) ++lines;
    CHECK(lines == 1 + 3 * 2);

    // The snapshot cube holds the synthesized scene bit for bit.
    SceneTruth truth;
    const SubbandSnapshots data =
        synthesize(cfg.layout, cfg.scenario, cfg.seed, &truth);
    const std::vector<Eigen::MatrixXcd> cube =
        read_complex_cube((dir.path / "snapshots.cube").string());
    REQUIRE(cube.size() == data.subband.size());
    for (std::size_t ell = 0; ell < cube.size(); ++ell) {
        CHECK((cube[ell] - data.subband[ell]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("complex cubes round-trip and reject corruption") {
    TempDir dir("cube");
    fs::create_directories(dir.path);
    const std::string path = (dir.path / "t.cube").string();

    std::vector<Eigen::MatrixXcd> slices{Eigen::MatrixXcd::Random(3, 5),
                                         Eigen::MatrixXcd::Random(3, 5)};
    write_complex_cube(path, slices);
    const std::vector<Eigen::MatrixXcd> back = read_complex_cube(path);
    REQUIRE(back.size() == 2);
    for (int i = 0; i < 2; ++i) {
        CHECK((back[i] - slices[i]).cwiseAbs().maxCoeff() == 0.0);
    }

    CHECK_THROWS_AS(
        write_complex_cube(path, std::vector<Eigen::MatrixXcd>{}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        write_complex_cube(
            path, std::vector<Eigen::MatrixXcd>{Eigen::MatrixXcd::Zero(2, 2),
                                                Eigen::MatrixXcd::Zero(3, 2)}),
        std::invalid_argument);
    CHECK_THROWS_AS(read_complex_cube((dir.path / "absent.cube").string()),
                    std::runtime_error);

    std::fstream corrupt(path,
                         std::ios::binary | std::ios::in | std::ios::out);
    corrupt.seekp(0);
    corrupt.write("XX", 2);
    corrupt.close();
    CHECK_THROWS_AS(read_complex_cube(path), std::runtime_error);
}

TEST_CASE("doubles format as their shortest round-trip") {
    CHECK(format_double(1.5) == "1.5");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-3.0) == "-3");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::nan("")) == "nan");
    for (double v : {1.0 / 3.0, 2.718281828459045, 6.02214076e23, 1e-300}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("csv rows must match the header width") {
    TempDir dir("csv");
    fs::create_directories(dir.path);
    const std::string path = (dir.path / "t.csv").string();
    CHECK_NOTHROW(write_csv(path, {"a", "b"}, {{"1", "2"}}));
    CHECK(read_text_file(path) == "a,b\n1,2\n");
    CHECK_THROWS_AS(write_csv(path, {"a", "b"}, {{"1"}}),
                    std::invalid_argument);
}

TEST_CASE("content hashes match the reference constants") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hash_hex(0) == "0000000000000000");
    CHECK(hash_hex(0xdeadbeefULL) == "00000000deadbeef");
}
