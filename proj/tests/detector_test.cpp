#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "tiledbeam/beamformer.hpp"
#include "tiledbeam/detector.hpp"

using namespace tiledbeam;

namespace {

constexpr double kPi = 3.14159265358979323846;

Waveform small_waveform() {
    Waveform w;
    w.samples_per_pulse = 64;
    w.n_subbands = 4;
    w.pulses_per_cpi = 8;
    return w;
}

// Pulse matrix of one point return: circularly delayed transmit pulse
// with a per-pulse Doppler phase, unit amplitude.
Eigen::MatrixXcd point_return(const Waveform& w, int delay, int doppler_bin) {
    const int S = w.samples_per_pulse;
    const int M = w.pulses_per_cpi;
    const Eigen::VectorXcd pulse = transmit_pulse(w);
    Eigen::MatrixXcd out(S, M);
    for (int m = 0; m < M; ++m) {
        const cxd phase =
            std::polar(1.0, 2.0 * kPi * doppler_bin * m / double(M));
        for (int n = 0; n < S; ++n) {
            out(n, m) = phase * pulse((n - delay + S) % S);
        }
    }
    return out;
}

RangeDopplerMap flat_map(const Waveform& w, double floor) {
    RangeDopplerMap map;
    map.power = Eigen::MatrixXd::Constant(w.samples_per_pulse,
                                          w.pulses_per_cpi, floor);
    map.range_m.resize(w.samples_per_pulse);
    map.velocity_mps.resize(w.pulses_per_cpi);
    for (int s = 0; s < w.samples_per_pulse; ++s)
        map.range_m[s] = s * w.range_bin_m();
    for (int j = 0; j < w.pulses_per_cpi; ++j)
        map.velocity_mps[j] =
            (j - w.pulses_per_cpi / 2) * w.velocity_bin_mps();
    return map;
}

}  // namespace

TEST_CASE("wideband synthesis inverts the channelizer") {
    const Waveform w = small_waveform();
    const int total = w.samples_per_pulse * w.pulses_per_cpi;
    Eigen::VectorXcd series(total);
    for (int i = 0; i < total; ++i) {
        series(i) = cxd(std::sin(0.23 * i), std::cos(0.41 * i + 1.0));
    }

    const Eigen::MatrixXcd bands = channelize_series(series, w.n_subbands);
    std::vector<Eigen::VectorXcd> per_subband;
    for (int ell = 0; ell < w.n_subbands; ++ell) {
        per_subband.push_back(bands.row(ell).transpose());
    }

    const Eigen::MatrixXcd pulses = synthesize_wideband(per_subband, w);
    REQUIRE(pulses.rows() == w.samples_per_pulse);
    REQUIRE(pulses.cols() == w.pulses_per_cpi);
    for (int m = 0; m < w.pulses_per_cpi; ++m) {
        const Eigen::VectorXcd expect =
            series.segment(m * w.samples_per_pulse, w.samples_per_pulse);
        CHECK((pulses.col(m) - expect).cwiseAbs().maxCoeff() < 1e-10);
    }

    per_subband.pop_back();
    CHECK_THROWS_AS(synthesize_wideband(per_subband, w),
                    std::invalid_argument);
}

TEST_CASE("a unit point return lands at unit power in its cell") {
    const Waveform w = small_waveform();
    const int delay = 20;
    const int dop = 3;
    const RangeDopplerMap map = range_doppler(point_return(w, delay, dop), w);

    // Raw Doppler bin 3 appears at column 3 + M/2 = 7 on the shifted
    // velocity axis.
    const int col = (dop + w.pulses_per_cpi / 2) % w.pulses_per_cpi;
    CHECK(map.power(delay, col) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(map.velocity_mps[col] ==
          doctest::Approx(dop * w.velocity_bin_mps()));
    CHECK(map.range_m[delay] == doctest::Approx(delay * w.range_bin_m()));

    // The chirp's circular autocorrelation is a delta and the Doppler is
    // on grid, so every other cell is numerically empty.
    Eigen::MatrixXd rest = map.power;
    rest(delay, col) = 0.0;
    CHECK(rest.maxCoeff() < 1e-12);
}

TEST_CASE("negative doppler bins land below the zero-velocity column") {
    const Waveform w = small_waveform();
    const int M = w.pulses_per_cpi;
    const RangeDopplerMap map = range_doppler(point_return(w, 5, M - 1), w);
    const int col = (M - 1 + M / 2) % M;  // one bin below center
    CHECK(map.power(5, col) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(map.velocity_mps[col] == doctest::Approx(-w.velocity_bin_mps()));

    CHECK_THROWS_AS(range_doppler(Eigen::MatrixXcd::Zero(10, 4), w),
                    std::invalid_argument);
}

TEST_CASE("false alarm probability matches the closed form") {
    CfarParams p;  // 10 dB over 16 training cells
    // (1 + 10/16)^{-16}
    CHECK(p.false_alarm_probability() ==
          doctest::Approx(4.2285e-4).epsilon(1e-3));

    p.guard_cells = -1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = CfarParams{};
    p.train_cells = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = CfarParams{};
    p.threshold_db = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("the CFAR stencil averages the right cells") {
    CfarParams p;  // guard 2, train 8 per side, reach 10
    Eigen::MatrixXd power = Eigen::MatrixXd::Ones(30, 1);
    power(15, 0) = 100.0;

    const auto mask = cfar_mask(power, p);
    int hits = 0;
    for (int r = 0; r < 30; ++r) hits += mask(r, 0);
    CHECK(hits == 1);
    CHECK(mask(15, 0) == 1);

    // The training window wraps, so an edge spike is still detected.
    power.setOnes();
    power(0, 0) = 100.0;
    CHECK(cfar_mask(power, p)(0, 0) == 1);

    // A spike inside someone else's training cells raises their noise
    // estimate; cell 18 sees the spike at distance 3 and stays quiet.
    power.setOnes();
    power(15, 0) = 100.0;
    power(18, 0) = 8.0;  // 8 < 10 * (100 + 15) / 16
    CHECK(cfar_mask(power, p)(18, 0) == 0);

    CHECK_THROWS_AS(cfar_mask(Eigen::MatrixXd::Ones(20, 1), p),
                    std::invalid_argument);
}

TEST_CASE("a flat map never fires, a strong spike fires once") {
    const Waveform w = small_waveform();
    const CfarParams p;
    RangeDopplerMap map = flat_map(w, 1.0);
    CHECK(cfar_detect(map, p).empty());

    map.power(40, 3) = 100.0;
    const std::vector<Detection> hits = cfar_detect(map, p);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].range_bin == 40);
    CHECK(hits[0].velocity_index == 3);
    CHECK(hits[0].power == doctest::Approx(100.0));
    // Flat unit training floor: SINR is the raw 20 dB.
    CHECK(hits[0].sinr_db == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(hits[0].range_m == doctest::Approx(40 * w.range_bin_m()));
}

TEST_CASE("adjacent crossings collapse onto the local peak") {
    const Waveform w = small_waveform();
    RangeDopplerMap map = flat_map(w, 1.0);
    map.power(30, 4) = 100.0;
    map.power(31, 4) = 90.0;
    map.power(30, 5) = 80.0;

    const std::vector<Detection> hits = cfar_detect(map, CfarParams{});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].range_bin == 30);
    CHECK(hits[0].velocity_index == 4);
}

TEST_CASE("association tolerates one bin of error and folds the wrap") {
    const Waveform w = small_waveform();
    const int M = w.pulses_per_cpi;

    SceneTruth truth;
    TargetTruth tt;
    tt.range_bin = 20;
    tt.velocity_bin = 3;
    tt.range_m = 20 * w.range_bin_m();
    tt.velocity_mps = 3 * w.velocity_bin_mps();
    truth.targets.push_back(tt);

    Detection d;
    d.range_bin = 21;
    d.velocity_index = (3 + M / 2) % M - 1;  // one bin low
    d.range_m = 21 * w.range_bin_m();
    d.velocity_mps = 2 * w.velocity_bin_mps();
    d.power = 50.0;
    d.sinr_db = 17.0;

    std::vector<TargetReport> rep = evaluate({d}, truth, w);
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].detected);
    CHECK(rep[0].range_err_m == doctest::Approx(w.range_bin_m()));
    CHECK(rep[0].velocity_err_mps == doctest::Approx(-w.velocity_bin_mps()));
    CHECK(rep[0].sinr_db == doctest::Approx(17.0));

    // Two candidates: the stronger one supplies the errors.
    Detection d2 = d;
    d2.range_bin = 19;
    d2.range_m = 19 * w.range_bin_m();
    d2.power = 80.0;
    d2.sinr_db = 21.0;
    rep = evaluate({d, d2}, truth, w);
    CHECK(rep[0].range_err_m == doctest::Approx(-w.range_bin_m()));
    CHECK(rep[0].sinr_db == doctest::Approx(21.0));

    // Too far away on either axis: a miss, with sentinel errors.
    d.range_bin = 25;
    rep = evaluate({d}, truth, w);
    CHECK_FALSE(rep[0].detected);
    CHECK(std::isinf(rep[0].range_err_m));
    CHECK(rep[0].sinr_db == -std::numeric_limits<double>::infinity());
}

TEST_CASE("range errors fold across the unambiguous edge") {
    const Waveform w = small_waveform();
    SceneTruth truth;
    TargetTruth tt;
    tt.range_bin = 0;
    tt.velocity_bin = 0;
    tt.range_m = 0.0;
    tt.velocity_mps = 0.0;
    truth.targets.push_back(tt);

    Detection d;
    d.range_bin = w.samples_per_pulse - 1;  // one bin below zero, wrapped
    d.velocity_index = w.pulses_per_cpi / 2;
    d.range_m = (w.samples_per_pulse - 1) * w.range_bin_m();
    d.velocity_mps = 0.0;
    d.power = 10.0;

    const std::vector<TargetReport> rep = evaluate({d}, truth, w);
    REQUIRE(rep[0].detected);
    CHECK(rep[0].range_err_m == doctest::Approx(-w.range_bin_m()));
}

TEST_CASE("truth-cell SINR reads the map whether or not CFAR fired") {
    const Waveform w = small_waveform();
    const CfarParams p;
    TargetTruth tt;
    tt.range_bin = 20;
    tt.velocity_bin = 3;
    const int col = (3 + w.pulses_per_cpi / 2) % w.pulses_per_cpi;

    RangeDopplerMap map = flat_map(w, 1.0);
    map.power(20, col) = 100.0;
    CHECK(truth_cell_sinr_db(map, tt, w, p) ==
          doctest::Approx(20.0).epsilon(1e-9));

    // The peak search covers the one-bin neighborhood.
    map = flat_map(w, 1.0);
    map.power(21, col - 1) = 100.0;
    CHECK(truth_cell_sinr_db(map, tt, w, p) ==
          doctest::Approx(20.0).epsilon(1e-9));

    // No return at all: the cell sits at the floor, 0 dB, not a sentinel.
    map = flat_map(w, 1.0);
    CHECK(truth_cell_sinr_db(map, tt, w, p) ==
          doctest::Approx(0.0).epsilon(1e-9));

    RangeDopplerMap wrong = flat_map(w, 1.0);
    wrong.power.conservativeResize(10, w.pulses_per_cpi);
    CHECK_THROWS_AS(truth_cell_sinr_db(wrong, tt, w, p),
                    std::invalid_argument);
}

TEST_CASE("narrowband output SINR matches the quadratic forms") {
    const ArrayLayout lay{1, 2, 1, 4, 10e9};
    Scenario sc;
    sc.waveform = small_waveform();
    sc.noise_db = 0.0;
    sc.targets.push_back({{0.2, 0.05}, 30.0, 12.0, 0.0});

    const int ell = 1;
    const Eigen::VectorXcd a = global_steering(
        lay, spatial_freq_at(reference_spatial_freq(sc.targets[0].angle),
                             subband_center_hz(sc.waveform, ell),
                             lay.design_freq_hz));
    const Eigen::VectorXcd w_match = a / a.squaredNorm();

    // Noise-only background: SINR = band power * |a|^2 / sigma^2.
    const double expect =
        10.0 * std::log10(target_band_power(sc, 0, ell) * a.squaredNorm());
    CHECK(output_sinr_db(w_match, lay, sc, ell, 0) ==
          doctest::Approx(expect).epsilon(1e-9));

    CHECK_THROWS_AS(output_sinr_db(w_match, lay, sc, ell, 5),
                    std::out_of_range);
    CHECK_THROWS_AS(output_sinr_db(Eigen::VectorXcd::Ones(3), lay, sc, ell, 0),
                    std::invalid_argument);
}

TEST_CASE("adapted weights beat the matched filter under jamming") {
    const ArrayLayout lay{1, 2, 1, 4, 10e9};
    Scenario sc;
    sc.waveform = small_waveform();
    sc.noise_db = 0.0;
    sc.targets.push_back({{0.2, 0.05}, 30.0, 12.0, 0.0});
    sc.interferers.push_back({{-0.5, 0.0}, 30.0});

    const int ell = 0;
    const Eigen::VectorXcd a = global_steering(
        lay, spatial_freq_at(reference_spatial_freq(sc.targets[0].angle),
                             subband_center_hz(sc.waveform, ell),
                             lay.design_freq_hz));

    Scenario background = sc;
    background.targets.clear();
    CovarianceEstimate est;
    est.r = analytic_covariance(lay, background, ell);
    est.n_snapshots = 1;
    const Correlator adapted = mvdr_weights(est, a);

    const double sinr_adapted = output_sinr_db(adapted.weights, lay, sc, ell, 0);
    const double sinr_matched =
        output_sinr_db(a / a.squaredNorm(), lay, sc, ell, 0);
    CHECK(sinr_adapted > sinr_matched + 10.0);
}
