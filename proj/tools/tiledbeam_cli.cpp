// Command-line front end for the tiled windowed-beamspace MVDR simulator.
//
// Verbs:
//   run            synthesize a scene, process it, write CSV + manifest
//   validate       parse and check a config without running anything
//   emit-pattern   dump the beam pattern of one steered beam as CSV
//   scenario-list  list the built-in scenario fixtures
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tiledbeam/io.hpp"
#include "tiledbeam/pipeline.hpp"

namespace {

using namespace tiledbeam;

struct FlagOverrides {
    std::string config_path;
    std::string profile = "desk";
    std::string scenario_name;
    double scenario_scale = 1.0;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string modes_csv;
    std::string window;
    std::string single_window;
    int snapshots = -1;
    double loading = -1.0;
    int jobs = 0;
    int target = -2;
    bool write_cubes = false;
};

void add_common_flags(CLI::App* sub, FlagOverrides& f) {
    sub->add_option("-c,--config", f.config_path, "JSON config file");
    sub->add_option("--profile", f.profile,
                    "built-in parameter set when no config file is given")
        ->check(CLI::IsMember({"desk", "field"}));
    sub->add_option("--scenario", f.scenario_name,
                    "named scenario fixture override");
    sub->add_option("--scale", f.scenario_scale,
                    "range scale for a named scenario");
    sub->add_option("--seed", f.seed, "RNG seed override");
    sub->add_option("--modes", f.modes_csv,
                    "comma list from {oracle,single,tiled}");
    sub->add_option("--window", f.window, "per-tile window as ZxX, e.g. 2x2");
    sub->add_option("--single-window", f.single_window,
                    "single-tile baseline window as ZxX, e.g. 4x4");
    sub->add_option("--snapshots", f.snapshots,
                    "training snapshots per subband (0 = all)");
    sub->add_option("--loading", f.loading, "diagonal loading factor");
    sub->add_option("-j,--jobs", f.jobs, "worker threads");
    sub->add_option("--target", f.target,
                    "designated target index (-1 = all)");
}

std::pair<int, int> parse_zx(const std::string& text, const std::string& flag) {
    int z = 0;
    int x = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%dx%d%c", &z, &x, &extra) != 2)
        throw std::invalid_argument(flag + ": expected ZxX, got '" + text +
                                    "'");
    return {z, x};
}

RunConfig build_config(const CLI::App* sub, const FlagOverrides& f) {
    RunConfig cfg = f.config_path.empty()
                        ? default_config(f.profile)
                        : config_from_json(read_text_file(f.config_path));
    if (sub->count("--scenario"))
        cfg.scenario = scenario_library(f.scenario_name, f.scenario_scale);
    else if (sub->count("--scale"))
        throw std::invalid_argument("--scale requires --scenario");
    if (sub->count("--seed")) cfg.seed = f.seed;
    if (sub->count("--modes")) {
        cfg.modes.clear();
        std::stringstream ss(f.modes_csv);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) cfg.modes.push_back(mode_from_name(item));
    }
    if (sub->count("--window")) {
        const auto [z, x] = parse_zx(f.window, "--window");
        cfg.window_z = z;
        cfg.window_x = x;
    }
    if (sub->count("--single-window")) {
        const auto [z, x] = parse_zx(f.single_window, "--single-window");
        cfg.single_window_z = z;
        cfg.single_window_x = x;
    }
    if (f.snapshots >= 0) cfg.snapshot_budget = f.snapshots;
    if (f.loading >= 0.0) cfg.loading_factor = f.loading;
    if (f.jobs > 0) cfg.parallelism = f.jobs;
    if (f.target != -2) cfg.designated_target = f.target;
    cfg.validate();
    return cfg;
}

int do_run(const CLI::App* sub, FlagOverrides& f) {
    RunConfig cfg = build_config(sub, f);
    if (sub->count("--out")) cfg.output_dir = f.out_dir;
    cfg.write_cubes = cfg.write_cubes || f.write_cubes;
    cfg.validate();

    const RunResult res = run(cfg);
    std::printf("scenario %s: %zu targets, %zu interferers, seed %llu\n",
                cfg.scenario.name.c_str(), cfg.scenario.targets.size(),
                cfg.scenario.interferers.size(),
                static_cast<unsigned long long>(cfg.seed));
    std::printf("%-8s %5s %9s %9s %12s %12s %10s\n", "mode", "dim", "snap",
                "detected", "sinr_db", "mainlobe", "solve_s");
    for (const ModeRun& mr : res.modes) {
        int detected = 0;
        double sinr_sum = 0.0;
        double lobe_sum = 0.0;
        for (const TargetOutcome& out : mr.targets) {
            detected += out.detection.detected ? 1 : 0;
            sinr_sum += out.output_sinr_db;
            lobe_sum += out.mainlobe_deg;
        }
        const double n = mr.targets.empty() ? 1.0 : double(mr.targets.size());
        std::printf("%-8s %5d %9d %6d/%-2zu %12.2f %12.3f %10.6f\n",
                    mode_name(mr.mode).c_str(), mr.dim, mr.snapshots_used,
                    detected, mr.targets.size(), sinr_sum / n, lobe_sum / n,
                    mr.solve_s);
    }
    if (!cfg.output_dir.empty())
        std::printf("wrote %zu files under %s\n", res.files.size(),
                    cfg.output_dir.c_str());
    return 0;
}

int do_validate(const CLI::App* sub, FlagOverrides& f, bool render) {
    const RunConfig cfg = build_config(sub, f);
    if (render) {
        std::printf("%s\n", config_to_json(cfg).c_str());
        return 0;
    }
    std::printf("config ok\n");
    std::printf("  array: %dx%d tiles of %dx%d (%d elements)\n",
                cfg.layout.tiles_z, cfg.layout.tiles_x, cfg.layout.elems_z,
                cfg.layout.elems_x, cfg.layout.total_elems());
    std::printf("  waveform: %d subbands, %d pulses, %d samples/pulse\n",
                cfg.scenario.waveform.n_subbands,
                cfg.scenario.waveform.pulses_per_cpi,
                cfg.scenario.waveform.samples_per_pulse);
    std::printf("  scenario: %s (%zu targets, %zu interferers)\n",
                cfg.scenario.name.c_str(), cfg.scenario.targets.size(),
                cfg.scenario.interferers.size());
    std::string modes;
    for (ProcessingMode m : cfg.modes) {
        if (!modes.empty()) modes += ",";
        modes += mode_name(m);
    }
    std::printf("  modes: %s\n", modes.c_str());
    return 0;
}

int do_emit_pattern(const CLI::App* sub, FlagOverrides& f,
                    const std::string& mode_str, const std::string& out_file,
                    double az_span, int az_count, double el_span,
                    int el_count) {
    RunConfig cfg = build_config(sub, f);
    cfg.modes = {mode_from_name(mode_str)};
    if (cfg.designated_target < 0) cfg.designated_target = 0;
    cfg.output_dir.clear();
    cfg.validate();
    if (cfg.scenario.targets.empty())
        throw std::invalid_argument("emit-pattern: scenario has no targets");

    const RunResult res = run(cfg);
    const TargetOutcome& out = res.modes.front().targets.front();
    const Eigen::VectorXcd& weights = out.weights.front();
    const double f_hz = cfg.scenario.waveform.carrier_hz;

    // The single-array baseline owns one tile, so its pattern lives on
    // that aperture.
    ArrayLayout lay = cfg.layout;
    if (cfg.modes.front() == ProcessingMode::single_beamspace) {
        lay.tiles_z = 1;
        lay.tiles_x = 1;
    }

    const double d2r = 3.14159265358979323846 / 180.0;
    std::vector<double> az(az_count);
    std::vector<double> el(el_count);
    for (int i = 0; i < az_count; ++i)
        az[i] = (-az_span + 2.0 * az_span * i / (az_count - 1)) * d2r;
    for (int i = 0; i < el_count; ++i)
        el[i] = (-el_span + 2.0 * el_span * i / (el_count - 1)) * d2r;
    const Eigen::MatrixXd pattern = beam_pattern(weights, lay, f_hz, az, el);

    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<std::size_t>(az_count) * el_count);
    for (int ia = 0; ia < az_count; ++ia)
        for (int ie = 0; ie < el_count; ++ie) {
            const double p = pattern(ia, ie);
            const double db = p > 1e-15 ? 20.0 * std::log10(p) : -300.0;
            rows.push_back({format_double(az[ia] / d2r),
                            format_double(el[ie] / d2r), format_double(db)});
        }
    write_csv(out_file, {"azimuth_deg", "elevation_deg", "power_db"}, rows);
    std::printf("pattern for target %d (%s mode): %s\n",
                out.target_id, mode_str.c_str(), out_file.c_str());
    return 0;
}

int do_scenario_list() {
    for (const std::string& name : scenario_library_names()) {
        const Scenario sc = scenario_library(name);
        double inr = 0.0;
        for (const Interferer& j : sc.interferers)
            inr = std::max(inr, j.inr_db);
        std::printf("%-10s %zu targets, %zu interferers, max INR %.0f dB\n",
                    name.c_str(), sc.targets.size(), sc.interferers.size(),
                    inr);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tiled windowed-beamspace MVDR radar simulator"};
    app.require_subcommand(1);

    FlagOverrides flags;

    CLI::App* sub_run = app.add_subcommand("run", "process a scene end to end");
    add_common_flags(sub_run, flags);
    sub_run->add_option("-o,--out", flags.out_dir, "output directory");
    sub_run->add_flag("--write-cubes", flags.write_cubes,
                      "also dump the raw snapshot cube");

    CLI::App* sub_validate =
        app.add_subcommand("validate", "check a configuration");
    add_common_flags(sub_validate, flags);
    bool render_config = false;
    sub_validate->add_flag("--render", render_config,
                           "print the rendered JSON config instead");

    CLI::App* sub_pattern =
        app.add_subcommand("emit-pattern", "dump a beam pattern grid");
    add_common_flags(sub_pattern, flags);
    std::string mode_str = "tiled";
    std::string pattern_out = "pattern.csv";
    double az_span = 89.0;
    double el_span = 89.0;
    int az_count = 181;
    int el_count = 61;
    sub_pattern->add_option("--mode", mode_str, "processing mode")
        ->check(CLI::IsMember({"oracle", "single", "tiled"}));
    sub_pattern->add_option("-o,--out", pattern_out, "output CSV path");
    sub_pattern->add_option("--az-span", az_span, "degrees, half span");
    sub_pattern->add_option("--az-count", az_count, "azimuth samples");
    sub_pattern->add_option("--el-span", el_span, "degrees, half span");
    sub_pattern->add_option("--el-count", el_count, "elevation samples");

    CLI::App* sub_list =
        app.add_subcommand("scenario-list", "list built-in scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sub_run->parsed()) return do_run(sub_run, flags);
        if (sub_validate->parsed())
            return do_validate(sub_validate, flags, render_config);
        if (sub_pattern->parsed())
            return do_emit_pattern(sub_pattern, flags, mode_str, pattern_out,
                                   az_span, az_count, el_span, el_count);
        if (sub_list->parsed()) return do_scenario_list();
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
