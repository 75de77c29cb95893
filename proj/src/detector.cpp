#include "tiledbeam/detector.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unsupported/Eigen/FFT>

#include "tiledbeam/beamspace.hpp"

namespace tiledbeam {

namespace {

int positive_mod(long long v, int n) {
    long long r = v % n;
    if (r < 0) r += n;
    return static_cast<int>(r);
}

// Signed circular difference a - b folded into [-n/2, n/2).
int circular_diff(int a, int b, int n) {
    return positive_mod(a - b + n / 2, n) - n / 2;
}

}  // namespace

double CfarParams::false_alarm_probability() const {
    const double tau = std::pow(10.0, threshold_db / 10.0);
    const double n = 2.0 * train_cells;
    return std::pow(1.0 + tau / n, -n);
}

void CfarParams::validate() const {
    if (guard_cells < 0 || train_cells < 1)
        throw std::invalid_argument("CFAR stencil cells out of range");
    if (!(threshold_db > 0.0))
        throw std::invalid_argument("CFAR threshold must be positive dB");
}

Eigen::MatrixXcd synthesize_wideband(
    const std::vector<Eigen::VectorXcd>& subband_series, const Waveform& w) {
    w.validate();
    const int L = w.n_subbands;
    const int blocks = w.blocks_per_pulse();
    const int M = w.pulses_per_cpi;
    if (static_cast<int>(subband_series.size()) != L)
        throw std::invalid_argument("need one series per subband");
    for (const Eigen::VectorXcd& s : subband_series)
        if (s.size() != static_cast<Eigen::Index>(M) * blocks)
            throw std::invalid_argument("subband series length mismatch");

    const Eigen::MatrixXcd inverse_bank = unitary_dft_matrix(L).adjoint();
    Eigen::MatrixXcd pulses(w.samples_per_pulse, M);
    Eigen::VectorXcd bin(L);
    for (int m = 0; m < M; ++m) {
        for (int b = 0; b < blocks; ++b) {
            for (int ell = 0; ell < L; ++ell)
                bin[ell] = subband_series[ell][m * blocks + b];
            pulses.col(m).segment(b * L, L) = inverse_bank * bin;
        }
    }
    return pulses;
}

RangeDopplerMap range_doppler(const Eigen::MatrixXcd& pulses,
                              const Waveform& w) {
    w.validate();
    const int S = w.samples_per_pulse;
    const int M = w.pulses_per_cpi;
    if (pulses.rows() != S || pulses.cols() != M)
        throw std::invalid_argument("pulse matrix does not match the waveform");

    Eigen::FFT<double> fft;
    std::vector<cxd> buf(S);
    const Eigen::VectorXcd tx = transmit_pulse(w);
    Eigen::VectorXcd tx_spec(S);
    fft.fwd(buf.data(), tx.data(), S);
    for (int i = 0; i < S; ++i) tx_spec[i] = std::conj(buf[i]);

    // Circular matched filter per pulse via the correlation theorem.
    Eigen::MatrixXcd compressed(S, M);
    Eigen::VectorXcd spec(S);
    for (int m = 0; m < M; ++m) {
        fft.fwd(buf.data(), pulses.col(m).data(), S);
        for (int i = 0; i < S; ++i) spec[i] = buf[i] * tx_spec[i];
        fft.inv(buf.data(), spec.data(), S);
        for (int i = 0; i < S; ++i) compressed(i, m) = buf[i] / double(S);
    }

    // Doppler DFT across pulses, then reorder columns so velocity ascends.
    const Eigen::MatrixXcd doppler =
        compressed * unitary_dft_matrix(M).transpose() / std::sqrt(double(M));

    RangeDopplerMap map;
    map.power.resize(S, M);
    map.range_m.resize(S);
    map.velocity_mps.resize(M);
    for (int s = 0; s < S; ++s) map.range_m[s] = s * w.range_bin_m();
    for (int j = 0; j < M; ++j) {
        const int signed_bin = j - M / 2;
        map.velocity_mps[j] = signed_bin * w.velocity_bin_mps();
        map.power.col(j) =
            doppler.col(positive_mod(signed_bin, M)).cwiseAbs2();
    }
    return map;
}

Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> cfar_mask(
    const Eigen::MatrixXd& power, const CfarParams& params) {
    params.validate();
    const int rows = static_cast<int>(power.rows());
    const int cols = static_cast<int>(power.cols());
    const int reach = params.guard_cells + params.train_cells;
    if (rows <= 2 * reach)
        throw std::invalid_argument("CFAR stencil exceeds the range extent");

    const double tau = std::pow(10.0, params.threshold_db / 10.0);
    const double n_train = 2.0 * params.train_cells;
    Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> mask(rows,
                                                                      cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (int k = params.guard_cells + 1; k <= reach; ++k) {
                acc += power(positive_mod(r - k, rows), c);
                acc += power(positive_mod(r + k, rows), c);
            }
            mask(r, c) = power(r, c) > tau * (acc / n_train) ? 1 : 0;
        }
    }
    return mask;
}

std::vector<Detection> cfar_detect(const RangeDopplerMap& map,
                                   const CfarParams& params) {
    const auto mask = cfar_mask(map.power, params);
    const int rows = static_cast<int>(map.power.rows());
    const int cols = static_cast<int>(map.power.cols());
    const double n_train = 2.0 * params.train_cells;
    const int reach = params.guard_cells + params.train_cells;

    std::vector<Detection> hits;
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) {
            if (!mask(r, c)) continue;
            const double p = map.power(r, c);
            bool peak = true;
            for (int dr = -1; dr <= 1 && peak; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    if (map.power(positive_mod(r + dr, rows),
                                  positive_mod(c + dc, cols)) > p) {
                        peak = false;
                        break;
                    }
                }
            if (!peak) continue;

            double acc = 0.0;
            for (int k = params.guard_cells + 1; k <= reach; ++k) {
                acc += map.power(positive_mod(r - k, rows), c);
                acc += map.power(positive_mod(r + k, rows), c);
            }
            const double noise = acc / n_train;
            Detection d;
            d.range_bin = r;
            d.velocity_index = c;
            d.range_m = map.range_m[r];
            d.velocity_mps = map.velocity_mps[c];
            d.power = p;
            d.sinr_db = noise > 0.0
                            ? 10.0 * std::log10(p / noise)
                            : std::numeric_limits<double>::infinity();
            hits.push_back(d);
        }
    }
    return hits;
}

std::vector<TargetReport> evaluate(const std::vector<Detection>& detections,
                                   const SceneTruth& truth, const Waveform& w) {
    const int S = w.samples_per_pulse;
    const int M = w.pulses_per_cpi;
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<TargetReport> report(truth.targets.size());
    for (std::size_t k = 0; k < truth.targets.size(); ++k) {
        const TargetTruth& tt = truth.targets[k];
        // Raw Doppler bin -> column index on the shifted velocity axis.
        const int truth_col = positive_mod(tt.velocity_bin + M / 2, M);

        TargetReport& row = report[k];
        row.target_id = static_cast<int>(k);
        row.detected = false;
        row.range_err_m = inf;
        row.velocity_err_mps = inf;
        row.sinr_db = -inf;

        const Detection* best = nullptr;
        for (const Detection& d : detections) {
            if (std::abs(circular_diff(d.range_bin, tt.range_bin, S)) > 1)
                continue;
            if (std::abs(circular_diff(d.velocity_index, truth_col, M)) > 1)
                continue;
            if (!best || d.power > best->power) best = &d;
        }
        if (best) {
            // Fold errors into +/- half the unambiguous span so edge
            // wrap-around does not inflate them.
            auto fold = [](double err, double span) {
                return err - span * std::round(err / span);
            };
            row.detected = true;
            row.range_err_m = fold(best->range_m - tt.range_m,
                                   w.unambiguous_range_m());
            row.velocity_err_mps = fold(best->velocity_mps - tt.velocity_mps,
                                        w.unambiguous_velocity_mps());
            row.sinr_db = best->sinr_db;
        }
    }
    return report;
}

double truth_cell_sinr_db(const RangeDopplerMap& map, const TargetTruth& truth,
                          const Waveform& w, const CfarParams& params) {
    params.validate();
    const int S = w.samples_per_pulse;
    const int M = w.pulses_per_cpi;
    if (map.power.rows() != S || map.power.cols() != M)
        throw std::invalid_argument("map does not match the waveform");
    const int reach = params.guard_cells + params.train_cells;
    if (S <= 2 * reach)
        throw std::invalid_argument("CFAR stencil exceeds the range extent");

    const int truth_col = positive_mod(truth.velocity_bin + M / 2, M);
    int peak_r = truth.range_bin;
    int peak_c = truth_col;
    double peak = -1.0;
    for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
            const int r = positive_mod(truth.range_bin + dr, S);
            const int c = positive_mod(truth_col + dc, M);
            if (map.power(r, c) > peak) {
                peak = map.power(r, c);
                peak_r = r;
                peak_c = c;
            }
        }

    double acc = 0.0;
    for (int k = params.guard_cells + 1; k <= reach; ++k) {
        acc += map.power(positive_mod(peak_r - k, S), peak_c);
        acc += map.power(positive_mod(peak_r + k, S), peak_c);
    }
    const double noise = acc / (2.0 * params.train_cells);
    if (!(noise > 0.0)) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak / noise);
}

double output_sinr_db(const Eigen::VectorXcd& weights,
                      const ArrayLayout& layout, const Scenario& scenario,
                      int ell, int target_index) {
    if (target_index < 0 ||
        target_index >= static_cast<int>(scenario.targets.size()))
        throw std::out_of_range("target index out of range");
    if (weights.size() != layout.total_elems())
        throw std::invalid_argument("weight length does not match the array");

    Scenario background = scenario;
    background.targets.clear();
    const Eigen::MatrixXcd r_in = analytic_covariance(layout, background, ell);

    const double f_ell = subband_center_hz(scenario.waveform, ell);
    const Eigen::VectorXcd a = global_steering(
        layout,
        spatial_freq_at(
            reference_spatial_freq(scenario.targets[target_index].angle),
            f_ell, layout.design_freq_hz));
    const double signal = target_band_power(scenario, target_index, ell) *
                          std::norm(weights.dot(a));
    const double clutter = std::real(weights.dot(r_in * weights));
    if (!(clutter > 0.0))
        throw std::runtime_error("interference power is not positive");
    return 10.0 * std::log10(signal / clutter);
}

}  // namespace tiledbeam
