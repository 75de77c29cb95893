#include "tiledbeam/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "tiledbeam/beamspace.hpp"
#include "tiledbeam/io.hpp"

namespace tiledbeam {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

double to_rad(double deg) { return deg * kPi / 180.0; }
double to_deg(double rad) { return rad * 180.0 / kPi; }

struct Stopwatch {
    std::chrono::steady_clock::time_point mark =
        std::chrono::steady_clock::now();

    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - mark).count();
        mark = now;
        return s;
    }
};

void run_parallel(int jobs, std::size_t n,
                  const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

std::string jammer_model_name(JammerModel m) {
    return m == JammerModel::point ? "point" : "element_white";
}

JammerModel jammer_model_from_name(const std::string& name) {
    if (name == "point") return JammerModel::point;
    if (name == "element_white") return JammerModel::element_white;
    throw std::invalid_argument("scenario.jammer_model: unknown '" + name +
                                "'");
}

}  // namespace

std::string mode_name(ProcessingMode mode) {
    switch (mode) {
        case ProcessingMode::oracle_full:
            return "oracle";
        case ProcessingMode::single_beamspace:
            return "single";
        case ProcessingMode::tiled_beamspace:
            return "tiled";
    }
    throw std::invalid_argument("unknown processing mode");
}

ProcessingMode mode_from_name(const std::string& name) {
    if (name == "oracle") return ProcessingMode::oracle_full;
    if (name == "single") return ProcessingMode::single_beamspace;
    if (name == "tiled") return ProcessingMode::tiled_beamspace;
    throw std::invalid_argument("processing.modes: unknown mode '" + name +
                                "'");
}

void RunConfig::validate() const {
    try {
        layout.validate();
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("array: ") + e.what());
    }
    try {
        scenario.validate();
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("scenario: ") + e.what());
    }
    if (modes.empty())
        throw std::invalid_argument(
            "processing.modes: at least one mode required");
    for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = i + 1; j < modes.size(); ++j)
            if (modes[i] == modes[j])
                throw std::invalid_argument(
                    "processing.modes: duplicate mode " + mode_name(modes[i]));
    if (window_z < 1 || window_z > layout.elems_z)
        throw std::invalid_argument(
            "processing.window.z: must lie in [1, elems_z]");
    if (window_x < 1 || window_x > layout.elems_x)
        throw std::invalid_argument(
            "processing.window.x: must lie in [1, elems_x]");
    if (single_window_z < 1 || single_window_z > layout.elems_z)
        throw std::invalid_argument(
            "processing.single_window.z: must lie in [1, elems_z]");
    if (single_window_x < 1 || single_window_x > layout.elems_x)
        throw std::invalid_argument(
            "processing.single_window.x: must lie in [1, elems_x]");
    if (loading_factor < 0.0)
        throw std::invalid_argument(
            "processing.loading_factor: must be >= 0");
    if (snapshot_budget < 0)
        throw std::invalid_argument("processing.snapshots: must be >= 0");
    try {
        cfar.validate();
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("processing.cfar: ") +
                                    e.what());
    }
    if (scenario.waveform.samples_per_pulse <=
        2 * (cfar.guard_cells + cfar.train_cells))
        throw std::invalid_argument(
            "processing.cfar: stencil exceeds the range extent");
    if (parallelism < 1)
        throw std::invalid_argument("run.parallelism: must be >= 1");
    if (designated_target != -1 &&
        (designated_target < 0 ||
         designated_target >= static_cast<int>(scenario.targets.size())))
        throw std::invalid_argument("run.designated_target: out of range");
}

RunConfig default_config(const std::string& profile) {
    RunConfig cfg;
    if (profile == "desk") {
        cfg.layout = {4, 2, 2, 16, 10e9};
        cfg.scenario = scenario_library("A1-like");
        // Tile z-extent is 2 here, so the 16-coefficient baseline window
        // takes shape 2x8 instead of 4x4.
        cfg.single_window_z = 2;
        cfg.single_window_x = 8;
    } else if (profile == "field") {
        cfg.layout = {4, 2, 4, 32, 10e9};
        cfg.scenario = scenario_library("A1-like");
        cfg.scenario.waveform.n_subbands = 32;
        cfg.scenario.waveform.samples_per_pulse = 1024;
    } else {
        throw std::invalid_argument("profile: unknown '" + profile + "'");
    }
    return cfg;
}

RunConfig config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    RunConfig cfg = default_config(j.value("profile", "desk"));

    if (j.contains("array")) {
        const json& a = j.at("array");
        cfg.layout.tiles_z = a.value("tiles_z", cfg.layout.tiles_z);
        cfg.layout.tiles_x = a.value("tiles_x", cfg.layout.tiles_x);
        cfg.layout.elems_z = a.value("elems_z", cfg.layout.elems_z);
        cfg.layout.elems_x = a.value("elems_x", cfg.layout.elems_x);
        cfg.layout.design_freq_hz =
            a.value("design_freq_hz", cfg.layout.design_freq_hz);
    }

    if (j.contains("scenario")) {
        const json& s = j.at("scenario");
        // "inline" is the reserved name for explicit target lists, so a
        // rendered config parses back to the same scenario.
        if (s.contains("name") &&
            s.at("name").get<std::string>() != "inline") {
            cfg.scenario = scenario_library(s.at("name").get<std::string>(),
                                            s.value("scale", 1.0));
        } else {
            if (s.contains("scale"))
                throw std::invalid_argument(
                    "scenario.scale: only valid with a named scenario");
            Scenario sc;
            sc.waveform = cfg.scenario.waveform;
            sc.name = "inline";
            for (const json& t : s.value("targets", json::array())) {
                Target tt;
                tt.angle = {to_rad(t.at("azimuth_deg").get<double>()),
                            to_rad(t.at("elevation_deg").get<double>())};
                tt.range_m = t.at("range_m").get<double>();
                tt.velocity_mps = t.value("velocity_mps", 0.0);
                tt.gain_db = t.value("gain_db", 0.0);
                sc.targets.push_back(tt);
            }
            for (const json& i : s.value("interferers", json::array())) {
                Interferer jj;
                jj.angle = {to_rad(i.at("azimuth_deg").get<double>()),
                            to_rad(i.at("elevation_deg").get<double>())};
                jj.inr_db = i.value("inr_db", 0.0);
                sc.interferers.push_back(jj);
            }
            cfg.scenario = sc;
        }
        if (s.contains("noise_db"))
            cfg.scenario.noise_db = s.at("noise_db").get<double>();
        if (s.contains("tile_noise_db"))
            cfg.scenario.tile_noise_db =
                s.at("tile_noise_db").get<std::vector<double>>();
        if (s.contains("jammer_model"))
            cfg.scenario.jammer_model =
                jammer_model_from_name(s.at("jammer_model").get<std::string>());
    }

    if (j.contains("waveform")) {
        const json& w = j.at("waveform");
        Waveform& wf = cfg.scenario.waveform;
        wf.carrier_hz = w.value("carrier_hz", wf.carrier_hz);
        wf.bandwidth_hz = w.value("bandwidth_hz", wf.bandwidth_hz);
        wf.n_subbands = w.value("n_subbands", wf.n_subbands);
        wf.pulses_per_cpi = w.value("pulses_per_cpi", wf.pulses_per_cpi);
        wf.samples_per_pulse =
            w.value("samples_per_pulse", wf.samples_per_pulse);
        wf.prf_hz = w.value("prf_hz", wf.prf_hz);
        wf.chirp = w.value("chirp", wf.chirp);
    }

    if (j.contains("processing")) {
        const json& p = j.at("processing");
        if (p.contains("modes")) {
            cfg.modes.clear();
            for (const json& m : p.at("modes"))
                cfg.modes.push_back(mode_from_name(m.get<std::string>()));
        }
        if (p.contains("window")) {
            cfg.window_z = p.at("window").value("z", cfg.window_z);
            cfg.window_x = p.at("window").value("x", cfg.window_x);
        }
        if (p.contains("single_window")) {
            cfg.single_window_z =
                p.at("single_window").value("z", cfg.single_window_z);
            cfg.single_window_x =
                p.at("single_window").value("x", cfg.single_window_x);
        }
        cfg.loading_factor = p.value("loading_factor", cfg.loading_factor);
        cfg.snapshot_budget = p.value("snapshots", cfg.snapshot_budget);
        if (p.contains("cfar")) {
            const json& c = p.at("cfar");
            cfg.cfar.guard_cells = c.value("guard", cfg.cfar.guard_cells);
            cfg.cfar.train_cells = c.value("train", cfg.cfar.train_cells);
            cfg.cfar.threshold_db =
                c.value("threshold_db", cfg.cfar.threshold_db);
        }
    }

    if (j.contains("run")) {
        const json& r = j.at("run");
        cfg.seed = r.value("seed", cfg.seed);
        cfg.parallelism = r.value("parallelism", cfg.parallelism);
        cfg.output_dir = r.value("output_dir", cfg.output_dir);
        cfg.write_cubes = r.value("write_cubes", cfg.write_cubes);
        cfg.designated_target =
            r.value("designated_target", cfg.designated_target);
    }

    cfg.validate();
    return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["array"] = {{"tiles_z", cfg.layout.tiles_z},
                  {"tiles_x", cfg.layout.tiles_x},
                  {"elems_z", cfg.layout.elems_z},
                  {"elems_x", cfg.layout.elems_x},
                  {"design_freq_hz", cfg.layout.design_freq_hz}};
    const Waveform& w = cfg.scenario.waveform;
    j["waveform"] = {{"carrier_hz", w.carrier_hz},
                     {"bandwidth_hz", w.bandwidth_hz},
                     {"n_subbands", w.n_subbands},
                     {"pulses_per_cpi", w.pulses_per_cpi},
                     {"samples_per_pulse", w.samples_per_pulse},
                     {"prf_hz", w.prf_hz},
                     {"chirp", w.chirp}};
    json targets = json::array();
    for (const Target& t : cfg.scenario.targets)
        targets.push_back({{"azimuth_deg", to_deg(t.angle.azimuth_rad)},
                           {"elevation_deg", to_deg(t.angle.elevation_rad)},
                           {"range_m", t.range_m},
                           {"velocity_mps", t.velocity_mps},
                           {"gain_db", t.gain_db}});
    json interferers = json::array();
    for (const Interferer& i : cfg.scenario.interferers)
        interferers.push_back(
            {{"azimuth_deg", to_deg(i.angle.azimuth_rad)},
             {"elevation_deg", to_deg(i.angle.elevation_rad)},
             {"inr_db", i.inr_db}});
    j["scenario"] = {{"name", cfg.scenario.name},
                     {"targets", targets},
                     {"interferers", interferers},
                     {"noise_db", cfg.scenario.noise_db},
                     {"jammer_model",
                      jammer_model_name(cfg.scenario.jammer_model)}};
    if (!cfg.scenario.tile_noise_db.empty())
        j["scenario"]["tile_noise_db"] = cfg.scenario.tile_noise_db;
    json modes = json::array();
    for (ProcessingMode m : cfg.modes) modes.push_back(mode_name(m));
    j["processing"] = {
        {"modes", modes},
        {"window", {{"z", cfg.window_z}, {"x", cfg.window_x}}},
        {"single_window",
         {{"z", cfg.single_window_z}, {"x", cfg.single_window_x}}},
        {"loading_factor", cfg.loading_factor},
        {"snapshots", cfg.snapshot_budget},
        {"cfar",
         {{"guard", cfg.cfar.guard_cells},
          {"train", cfg.cfar.train_cells},
          {"threshold_db", cfg.cfar.threshold_db}}}};
    j["run"] = {{"seed", cfg.seed},
                {"parallelism", cfg.parallelism},
                {"output_dir", cfg.output_dir},
                {"write_cubes", cfg.write_cubes},
                {"designated_target", cfg.designated_target}};
    return j.dump(2);
}

namespace {

void write_outputs(const RunConfig& cfg, const SubbandSnapshots& data,
                   RunResult& res) {
    namespace fs = std::filesystem;
    Stopwatch write_clock;
    fs::create_directories(cfg.output_dir);
    auto in_dir = [&](const std::string& name) {
        return (fs::path(cfg.output_dir) / name).string();
    };
    const std::string scen = cfg.scenario.name;

    std::vector<std::vector<std::string>> report_rows;
    std::vector<std::vector<std::string>> detection_rows;
    std::vector<std::vector<std::string>> beam_rows;
    for (const ModeRun& mr : res.modes) {
        const std::string mode = mode_name(mr.mode);
        for (const TargetOutcome& out : mr.targets) {
            const double cond_max =
                out.condition.empty()
                    ? 0.0
                    : *std::max_element(out.condition.begin(),
                                        out.condition.end());
            report_rows.push_back({scen, mode, std::to_string(out.target_id),
                                   out.detection.detected ? "1" : "0",
                                   format_double(out.detection.range_err_m),
                                   format_double(out.detection.velocity_err_mps),
                                   format_double(out.detection_sinr_db),
                                   format_double(out.output_sinr_db),
                                   format_double(out.mainlobe_deg),
                                   format_double(cond_max)});
            for (const Detection& d : out.hits)
                detection_rows.push_back({scen, mode,
                                          std::to_string(out.target_id),
                                          std::to_string(d.range_bin),
                                          std::to_string(d.velocity_index),
                                          format_double(d.range_m),
                                          format_double(d.velocity_mps),
                                          format_double(d.power),
                                          format_double(d.sinr_db)});
            for (std::size_t ell = 0; ell < out.condition.size(); ++ell)
                beam_rows.push_back({scen, mode, std::to_string(out.target_id),
                                     std::to_string(ell),
                                     format_double(data.center_hz[ell]),
                                     std::to_string(mr.dim),
                                     format_double(out.condition[ell]),
                                     out.near_singular ? "1" : "0"});
        }
    }

    write_csv(in_dir("report.csv"),
              {"scenario", "mode", "target_id", "detected", "range_err_m",
               "velocity_err_mps", "detection_sinr_db", "output_sinr_db",
               "mainlobe_deg", "condition_max"},
              report_rows);
    res.files.push_back(in_dir("report.csv"));
    write_csv(in_dir("detections.csv"),
              {"scenario", "mode", "beam_target_id", "range_bin",
               "velocity_index", "range_m", "velocity_mps", "power",
               "sinr_db"},
              detection_rows);
    res.files.push_back(in_dir("detections.csv"));
    write_csv(in_dir("beams.csv"),
              {"scenario", "mode", "target_id", "subband", "center_hz", "dim",
               "condition", "near_singular"},
              beam_rows);
    res.files.push_back(in_dir("beams.csv"));

    if (cfg.write_cubes) {
        write_complex_cube(in_dir("snapshots.cube"), data.subband);
        res.files.push_back(in_dir("snapshots.cube"));
        json side;
        side["slices"] = data.subband.size();
        side["rows"] = data.subband.front().rows();
        side["cols"] = data.subband.front().cols();
        side["center_hz"] = data.center_hz;
        side["noise_power"] = data.noise_power;
        side["seed"] = cfg.seed;
        write_text_file(in_dir("snapshots.json"), side.dump(2) + "\n");
        res.files.push_back(in_dir("snapshots.json"));
    }

    // Manifest last so it can carry the other files' content hashes.
    res.write_s = write_clock.lap();
    json m;
    const std::string cfg_text = config_to_json(cfg);
    m["schema_version"] = 1;
    m["config"] = json::parse(cfg_text);
    m["config_hash"] = hash_hex(fnv1a64(cfg_text));
    json timings;
    timings["synthesize_s"] = res.synthesize_s;
    json mode_entries = json::array();
    for (const ModeRun& mr : res.modes) {
        json row;
        row["mode"] = mode_name(mr.mode);
        row["dim"] = mr.dim;
        row["snapshots"] = mr.snapshots_used;
        row["reduce_s"] = mr.reduce_s;
        row["estimate_s"] = mr.estimate_s;
        row["solve_s"] = mr.solve_s;
        row["detect_s"] = mr.detect_s;
        json targets = json::array();
        for (const TargetOutcome& out : mr.targets)
            targets.push_back({{"target_id", out.target_id},
                               {"detected", out.detection.detected},
                               {"output_sinr_db", out.output_sinr_db},
                               {"detection_sinr_db", out.detection_sinr_db},
                               {"mainlobe_deg", out.mainlobe_deg}});
        row["targets"] = targets;
        mode_entries.push_back(row);
    }
    m["modes"] = mode_entries;
    timings["write_s"] = res.write_s;
    timings["total_s"] = res.total_s;
    m["timings"] = timings;
    json outputs = json::array();
    for (const std::string& f : res.files)
        outputs.push_back(
            {{"path", fs::path(f).filename().string()},
             {"fnv1a64", hash_hex(hash_file(f))}});
    m["outputs"] = outputs;
    write_text_file(in_dir("manifest.json"), m.dump(2) + "\n");
    res.files.push_back(in_dir("manifest.json"));
}

}  // namespace

RunResult run(const RunConfig& cfg) {
    cfg.validate();
    Stopwatch total_clock;
    RunResult res;

    Stopwatch clock;
    const SubbandSnapshots data =
        synthesize(cfg.layout, cfg.scenario, cfg.seed, &res.truth);
    res.synthesize_s = clock.lap();

    const int L = cfg.scenario.waveform.n_subbands;
    const int n_snap = static_cast<int>(data.subband.front().rows());
    const int n_el = cfg.layout.total_elems();

    std::vector<int> beams;
    if (cfg.designated_target >= 0) {
        beams.push_back(cfg.designated_target);
    } else {
        for (int k = 0; k < static_cast<int>(cfg.scenario.targets.size()); ++k)
            beams.push_back(k);
    }

    // Interference-plus-noise covariance per subband, for the SINR metric.
    Scenario background = cfg.scenario;
    background.targets.clear();
    std::vector<Eigen::MatrixXcd> r_in(L);
    for (int ell = 0; ell < L; ++ell)
        r_in[ell] = analytic_covariance(cfg.layout, background, ell);

    // The single-array baseline processes one tile as a standalone
    // aperture: same scene, an eighth of the elements on the reference
    // geometry. Tile 0 occupies the leading element columns.
    const bool need_single =
        std::find(cfg.modes.begin(), cfg.modes.end(),
                  ProcessingMode::single_beamspace) != cfg.modes.end();
    ArrayLayout sub = cfg.layout;
    sub.tiles_z = 1;
    sub.tiles_x = 1;
    std::vector<Eigen::MatrixXcd> sub_data;
    std::vector<Eigen::MatrixXcd> r_in_sub;
    if (need_single) {
        sub_data.resize(L);
        r_in_sub.resize(L);
        for (int ell = 0; ell < L; ++ell) {
            sub_data[ell] = data.subband[ell].leftCols(sub.total_elems());
            r_in_sub[ell] = analytic_covariance(sub, background, ell);
        }
    }

    for (ProcessingMode mode : cfg.modes) {
        ModeRun mr;
        mr.mode = mode;
        switch (mode) {
            case ProcessingMode::oracle_full:
                mr.dim = n_el;
                break;
            case ProcessingMode::single_beamspace:
                mr.dim = cfg.single_window_z * cfg.single_window_x;
                break;
            case ProcessingMode::tiled_beamspace:
                mr.dim = cfg.layout.tile_count() * cfg.window_z * cfg.window_x;
                break;
        }
        // Sample-covariance training length: four times the solved
        // dimension when no explicit budget is given, never more than the
        // CPI provides.
        const int n_train = std::min(
            n_snap, cfg.snapshot_budget > 0 ? cfg.snapshot_budget : 4 * mr.dim);
        mr.snapshots_used = n_train;
        mr.targets.resize(beams.size());

        // The full-dimensional reference shares one covariance and one
        // factorization per subband across all beams.
        std::vector<std::unique_ptr<CovarianceSolver>> shared(L);
        double shared_estimate_s = 0.0;
        double shared_solve_s = 0.0;
        if (mode == ProcessingMode::oracle_full) {
            for (int ell = 0; ell < L; ++ell) {
                Stopwatch sw;
                const CovarianceEstimate est = estimate_covariance(
                    data.subband[ell].topRows(n_train), cfg.loading_factor);
                shared_estimate_s += sw.lap();
                shared[ell] = std::make_unique<CovarianceSolver>(est);
                shared_solve_s += sw.lap();
            }
        }

        struct ItemTiming {
            double reduce = 0.0, estimate = 0.0, solve = 0.0, detect = 0.0;
        };
        std::vector<ItemTiming> timing(beams.size());
        std::vector<std::exception_ptr> errors(beams.size());

        auto process = [&](std::size_t idx) {
            try {
                const int k = beams[idx];
                TargetOutcome& out = mr.targets[idx];
                out.target_id = k;
                out.condition.resize(L);
                out.weights.resize(L);
                ItemTiming& tm = timing[idx];

                const SpatialFrequency ref =
                    reference_spatial_freq(cfg.scenario.targets[k].angle);
                std::vector<Eigen::VectorXcd> z(L);

                for (int ell = 0; ell < L; ++ell) {
                    const SpatialFrequency omega =
                        spatial_freq_at(ref, data.center_hz[ell],
                                        cfg.layout.design_freq_hz);
                    if (mode == ProcessingMode::oracle_full) {
                        const Eigen::VectorXcd a =
                            global_steering(cfg.layout, omega);
                        Stopwatch sw;
                        const Correlator c = shared[ell]->solve(a);
                        tm.solve += sw.lap();
                        out.weights[ell] = c.weights;
                        out.condition[ell] = c.condition;
                        out.near_singular |= c.near_singular;
                        z[ell] = mvdr_output(c, data.subband[ell]);
                        tm.detect += sw.lap();
                        continue;
                    }
                    const bool single =
                        mode == ProcessingMode::single_beamspace;
                    const ArrayLayout& lay = single ? sub : cfg.layout;
                    const Eigen::MatrixXcd& y =
                        single ? sub_data[ell] : data.subband[ell];
                    BeamspaceWindow window = plan_window(
                        lay, omega, single ? cfg.single_window_z : cfg.window_z,
                        single ? cfg.single_window_x : cfg.window_x);
                    window.target_id = k;
                    window.subband = ell;
                    const Eigen::VectorXcd a_w =
                        windowed_steering(lay, window, omega);

                    Stopwatch sw;
                    const Eigen::MatrixXcd reduced =
                        reduce_snapshots(window, lay, y);
                    tm.reduce += sw.lap();
                    const CovarianceEstimate est = estimate_covariance(
                        reduced.topRows(n_train), cfg.loading_factor);
                    tm.estimate += sw.lap();
                    const Correlator c =
                        mvdr_weights(est, a_w, Correlator::Domain::beamspace);
                    tm.solve += sw.lap();
                    const LiftedCorrelator lifted = lift(c, lay, window);
                    out.weights[ell] = lifted.weights;
                    out.condition[ell] = c.condition;
                    out.near_singular |= c.near_singular;
                    z[ell] = mvdr_output(c, reduced);
                    tm.detect += sw.lap();
                }

                // Wideband SINR against the ground-truth background, on the
                // aperture this mode actually observes.
                const bool single_mode =
                    mode == ProcessingMode::single_beamspace;
                const ArrayLayout& out_lay = single_mode ? sub : cfg.layout;
                const std::vector<Eigen::MatrixXcd>& out_r_in =
                    single_mode ? r_in_sub : r_in;
                double num = 0.0;
                double den = 0.0;
                for (int ell = 0; ell < L; ++ell) {
                    const Eigen::VectorXcd a = global_steering(
                        out_lay,
                        spatial_freq_at(ref, data.center_hz[ell],
                                        cfg.layout.design_freq_hz));
                    num += target_band_power(cfg.scenario, k, ell) *
                           std::norm(out.weights[ell].dot(a));
                    den += std::real(out.weights[ell].dot(out_r_in[ell] *
                                                          out.weights[ell]));
                }
                out.output_sinr_db = 10.0 * std::log10(num / den);
                out.mainlobe_deg = mainlobe_width_deg(
                    out.weights[0], out_lay, data.center_hz[0],
                    cfg.scenario.targets[k].angle);

                Stopwatch sw;
                const Eigen::MatrixXcd wideband =
                    synthesize_wideband(z, cfg.scenario.waveform);
                const RangeDopplerMap map =
                    range_doppler(wideband, cfg.scenario.waveform);
                out.hits = cfar_detect(map, cfg.cfar);
                const std::vector<TargetReport> reports =
                    evaluate(out.hits, res.truth, cfg.scenario.waveform);
                out.detection = reports[k];
                out.detection_sinr_db = truth_cell_sinr_db(
                    map, res.truth.targets[k], cfg.scenario.waveform,
                    cfg.cfar);
                tm.detect += sw.lap();
            } catch (...) {
                errors[idx] = std::current_exception();
            }
        };
        run_parallel(cfg.parallelism, beams.size(), process);
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);

        mr.estimate_s = shared_estimate_s;
        mr.solve_s = shared_solve_s;
        for (const ItemTiming& tm : timing) {
            mr.reduce_s += tm.reduce;
            mr.estimate_s += tm.estimate;
            mr.solve_s += tm.solve;
            mr.detect_s += tm.detect;
        }
        res.modes.push_back(std::move(mr));
    }

    res.total_s = total_clock.lap();
    if (!cfg.output_dir.empty()) write_outputs(cfg, data, res);
    return res;
}

}  // namespace tiledbeam
