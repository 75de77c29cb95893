#include "tiledbeam/scene.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "tiledbeam/beamspace.hpp"

namespace tiledbeam {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kPi = 3.14159265358979323846;

// Stream tags keep the jammer/noise draws of different consumers of the
// same base seed from colliding.
constexpr std::uint64_t kSceneStreamTag = 0x7363656e65ULL;

int positive_mod(long long v, int n) {
    long long r = v % n;
    if (r < 0) r += n;
    return static_cast<int>(r);
}

cxd complex_gauss(std::mt19937_64& eng, std::normal_distribution<double>& g) {
    const double re = g(eng);
    const double im = g(eng);
    return cxd(re, im) / std::sqrt(2.0);
}

}  // namespace

double Waveform::range_bin_m() const {
    return kSpeedOfLight / (2.0 * bandwidth_hz);
}

double Waveform::unambiguous_range_m() const {
    return samples_per_pulse * range_bin_m();
}

double Waveform::velocity_bin_mps() const {
    const double lambda = kSpeedOfLight / carrier_hz;
    return lambda * prf_hz / (2.0 * pulses_per_cpi);
}

double Waveform::unambiguous_velocity_mps() const {
    return pulses_per_cpi * velocity_bin_mps();
}

void Waveform::validate() const {
    if (carrier_hz <= 0.0 || bandwidth_hz <= 0.0 || prf_hz <= 0.0)
        throw std::invalid_argument("waveform frequencies must be positive");
    if (n_subbands < 1 || pulses_per_cpi < 1 || samples_per_pulse < 1)
        throw std::invalid_argument("waveform counts must be at least 1");
    if (samples_per_pulse % n_subbands != 0)
        throw std::invalid_argument(
            "subband count must divide the pulse length");
    if (bandwidth_hz >= 2.0 * carrier_hz)
        throw std::invalid_argument("bandwidth exceeds the carrier band");
}

void Scenario::validate() const {
    waveform.validate();
    for (const Target& t : targets) {
        if (t.range_m < 0.0 || t.range_m >= waveform.unambiguous_range_m())
            throw std::invalid_argument(
                "target range outside the unambiguous interval");
        if (std::abs(t.velocity_mps) >
            0.5 * waveform.unambiguous_velocity_mps())
            throw std::invalid_argument(
                "target velocity outside the unambiguous interval");
        reference_spatial_freq(t.angle);  // angle range check
    }
    for (const Interferer& j : interferers) reference_spatial_freq(j.angle);
}

double subband_center_hz(const Waveform& w, int ell) {
    if (ell < 0 || ell >= w.n_subbands)
        throw std::out_of_range("subband index out of range");
    const int half = (w.n_subbands + 1) / 2;
    const int signed_bin = ell < half ? ell : ell - w.n_subbands;
    return w.carrier_hz + signed_bin * (w.bandwidth_hz / w.n_subbands);
}

Eigen::VectorXcd transmit_pulse(const Waveform& w) {
    const int s = w.samples_per_pulse;
    Eigen::VectorXcd p(s);
    if (w.chirp) {
        for (int n = 0; n < s; ++n) {
            const double phase = kPi * static_cast<double>(n) * n / s;
            p[n] = std::polar(1.0, phase);
        }
    } else {
        p.setOnes();
    }
    return p;
}

Eigen::MatrixXcd channelize_series(const Eigen::VectorXcd& series, int L) {
    if (L < 1) throw std::invalid_argument("subband count must be positive");
    if (series.size() % L != 0)
        throw std::invalid_argument(
            "subband count must divide the series length");
    const int blocks = static_cast<int>(series.size()) / L;
    Eigen::Map<const Eigen::MatrixXcd> stacked(series.data(), L, blocks);
    return unitary_dft_matrix(L) * stacked;
}

SubbandSnapshots channelize(const Eigen::MatrixXcd& element_series,
                            const Waveform& w) {
    w.validate();
    const int n_el = static_cast<int>(element_series.cols());
    const int L = w.n_subbands;
    if (element_series.rows() % L != 0)
        throw std::invalid_argument(
            "subband count must divide the sample count");
    const int n_snap = static_cast<int>(element_series.rows()) / L;

    SubbandSnapshots out;
    out.subband.assign(L, Eigen::MatrixXcd::Zero(n_snap, n_el));
    out.center_hz.resize(L);
    for (int ell = 0; ell < L; ++ell)
        out.center_hz[ell] = subband_center_hz(w, ell);
    for (int e = 0; e < n_el; ++e) {
        const Eigen::MatrixXcd bands = channelize_series(element_series.col(e), L);
        for (int ell = 0; ell < L; ++ell)
            out.subband[ell].col(e) = bands.row(ell).transpose();
    }
    return out;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SubbandSnapshots synthesize(const ArrayLayout& layout, const Scenario& scenario,
                            std::uint64_t seed, SceneTruth* truth) {
    layout.validate();
    scenario.validate();
    const Waveform& w = scenario.waveform;
    const int L = w.n_subbands;
    const int S = w.samples_per_pulse;
    const int M = w.pulses_per_cpi;
    const int blocks = w.blocks_per_pulse();
    const int n_el = layout.total_elems();
    const int n_per_tile = layout.elems_per_tile();
    const double noise_power = std::pow(10.0, scenario.noise_db / 10.0);

    if (scenario.targets.empty() && scenario.interferers.empty() &&
        !(noise_power > 0.0))
        throw std::invalid_argument("degenerate scene: no sources, no noise");

    std::vector<double> tile_noise_amp(layout.tile_count(),
                                       std::sqrt(noise_power));
    if (!scenario.tile_noise_db.empty()) {
        if (static_cast<int>(scenario.tile_noise_db.size()) !=
            layout.tile_count())
            throw std::invalid_argument(
                "per-tile noise list must match the tile count");
        for (int t = 0; t < layout.tile_count(); ++t)
            tile_noise_amp[t] =
                std::pow(10.0, scenario.tile_noise_db[t] / 20.0);
    }

    const Eigen::VectorXcd pulse = transmit_pulse(w);
    const double lambda_c = kSpeedOfLight / w.carrier_hz;

    struct TargetTerms {
        double amplitude;
        double doppler_rate;               // radians per pulse
        Eigen::MatrixXcd bands;            // [L x blocks] channelized pulse
        std::vector<Eigen::VectorXcd> steering;  // per subband
    };
    std::vector<TargetTerms> tk(scenario.targets.size());
    if (truth) truth->targets.assign(scenario.targets.size(), TargetTruth{});

    for (std::size_t k = 0; k < scenario.targets.size(); ++k) {
        const Target& tgt = scenario.targets[k];
        TargetTerms& terms = tk[k];
        terms.amplitude = std::pow(10.0, tgt.gain_db / 20.0);
        terms.doppler_rate =
            2.0 * kPi * (2.0 * tgt.velocity_mps / lambda_c) / w.prf_hz;

        const int delay = positive_mod(
            std::llround(2.0 * tgt.range_m * w.bandwidth_hz / kSpeedOfLight),
            S);
        Eigen::VectorXcd delayed(S);
        for (int n = 0; n < S; ++n) delayed[n] = pulse[positive_mod(n - delay, S)];
        terms.bands = channelize_series(delayed, L);

        const SpatialFrequency ref = reference_spatial_freq(tgt.angle);
        terms.steering.reserve(L);
        for (int ell = 0; ell < L; ++ell)
            terms.steering.push_back(global_steering(
                layout,
                spatial_freq_at(ref, subband_center_hz(w, ell),
                                layout.design_freq_hz)));

        if (truth) {
            TargetTruth& tt = truth->targets[k];
            tt.range_bin = delay;
            tt.velocity_bin = positive_mod(
                std::llround(2.0 * tgt.velocity_mps * M / (lambda_c * w.prf_hz)),
                M);
            tt.omega_ref = ref;
            tt.range_m = tgt.range_m;
            tt.velocity_mps = tgt.velocity_mps;
            tt.gain_db = tgt.gain_db;
        }
    }

    std::vector<double> jam_amp(scenario.interferers.size());
    std::vector<std::vector<Eigen::VectorXcd>> jam_steering(
        scenario.interferers.size());
    for (std::size_t j = 0; j < scenario.interferers.size(); ++j) {
        jam_amp[j] = std::pow(10.0, scenario.interferers[j].inr_db / 20.0);
        const SpatialFrequency ref =
            reference_spatial_freq(scenario.interferers[j].angle);
        jam_steering[j].reserve(L);
        for (int ell = 0; ell < L; ++ell)
            jam_steering[j].push_back(global_steering(
                layout,
                spatial_freq_at(ref, subband_center_hz(w, ell),
                                layout.design_freq_hz)));
    }

    SubbandSnapshots out;
    out.subband.assign(L, Eigen::MatrixXcd::Zero(M * blocks, n_el));
    out.center_hz.resize(L);
    out.noise_power = noise_power;

    for (int ell = 0; ell < L; ++ell) {
        out.center_hz[ell] = subband_center_hz(w, ell);
        Eigen::MatrixXcd& y = out.subband[ell];

        // Deterministic target returns: one rank-1 time/space profile each.
        for (const TargetTerms& terms : tk) {
            Eigen::VectorXcd profile(M * blocks);
            for (int m = 0; m < M; ++m) {
                const cxd pulse_phase =
                    terms.amplitude *
                    std::polar(1.0, terms.doppler_rate * m);
                for (int b = 0; b < blocks; ++b)
                    profile[m * blocks + b] = pulse_phase * terms.bands(ell, b);
            }
            y.noalias() += profile * terms.steering[ell].transpose();
        }

        // Random draws: one stream per (subband, pulse), jammers first in
        // listed order, then noise, so that any execution order over
        // subbands or pulses reproduces the same data.
        for (int m = 0; m < M; ++m) {
            std::mt19937_64 eng(
                mix_seed(mix_seed(mix_seed(seed, kSceneStreamTag),
                                  static_cast<std::uint64_t>(ell)),
                         static_cast<std::uint64_t>(m)));
            std::normal_distribution<double> gauss(0.0, 1.0);

            for (std::size_t j = 0; j < scenario.interferers.size(); ++j) {
                if (scenario.jammer_model == JammerModel::point) {
                    for (int b = 0; b < blocks; ++b) {
                        const cxd s = jam_amp[j] * complex_gauss(eng, gauss);
                        y.row(m * blocks + b) +=
                            s * jam_steering[j][ell].transpose();
                    }
                } else {
                    for (int b = 0; b < blocks; ++b)
                        for (int e = 0; e < n_el; ++e)
                            y(m * blocks + b, e) +=
                                jam_amp[j] * complex_gauss(eng, gauss);
                }
            }
            for (int b = 0; b < blocks; ++b)
                for (int e = 0; e < n_el; ++e)
                    y(m * blocks + b, e) += tile_noise_amp[e / n_per_tile] *
                                            complex_gauss(eng, gauss);
        }
    }
    return out;
}

Scenario scenario_library(const std::string& name, double scale) {
    if (!(scale > 0.0))
        throw std::invalid_argument("scenario scale must be positive");

    Waveform w;  // desk-scale defaults from the struct initializers
    Scenario sc;
    sc.waveform = w;
    sc.name = name;

    const double d2r = kPi / 180.0;
    auto target = [&](double az_deg, double el_deg, double range_m,
                      double vel_mps) {
        Target t;
        t.angle = {az_deg * d2r, el_deg * d2r};
        t.range_m = range_m * scale;
        t.velocity_mps = vel_mps;
        t.gain_db = 0.0;
        return t;
    };
    auto jammer = [&](double az_deg, double el_deg, double inr_db) {
        Interferer j;
        j.angle = {az_deg * d2r, el_deg * d2r};
        j.inr_db = inr_db;
        return j;
    };

    if (name == "A1-like") {
        // Sparse interference, targets lifted well off the horizon.
        sc.targets = {
            target(-40.0, 12.0, 60.0, -40.0),
            target(-30.0, 18.0, 100.0, 25.0),
            target(-20.0, 10.0, 140.0, 90.0),
            target(-10.0, 22.0, 180.0, -75.0),
            target(0.0, 15.0, 210.0, 10.0),
            target(10.0, 26.0, 250.0, 120.0),
            target(20.0, 11.0, 280.0, -110.0),
            target(30.0, 19.0, 320.0, 55.0),
            target(40.0, 14.0, 350.0, -20.0),
        };
        sc.interferers = {
            jammer(-25.0, 0.5, 120.0),
            jammer(18.0, -1.0, 120.0),
        };
    } else if (name == "E2-like") {
        // Dense interference pressed against the horizon: low-flying
        // targets with ground- and sea-based emitters a few degrees
        // below them and interleaved in azimuth.
        sc.targets = {
            target(-44.0, 0.6, 55.0, -35.0),
            target(-33.0, 1.2, 95.0, 30.0),
            target(-22.0, 2.1, 130.0, 85.0),
            target(-12.0, 0.9, 170.0, -70.0),
            target(-2.0, 1.6, 205.0, 15.0),
            target(9.0, 2.8, 240.0, 115.0),
            target(19.0, 0.7, 275.0, -105.0),
            target(30.0, 1.9, 310.0, 60.0),
            target(41.0, 2.5, 345.0, -15.0),
        };
        sc.interferers = {
            jammer(-49.0, -3.0, 80.0), jammer(-28.0, -4.5, 80.0),
            jammer(-17.0, -2.5, 80.0), jammer(-7.0, -6.0, 80.0),
            jammer(4.0, -5.0, 80.0),   jammer(14.0, -5.5, 80.0),
            jammer(25.0, -4.5, 80.0),  jammer(36.0, -5.5, 80.0),
        };
    } else {
        throw std::invalid_argument("unknown scenario: " + name);
    }
    sc.validate();
    return sc;
}

std::vector<std::string> scenario_library_names() {
    return {"A1-like", "E2-like"};
}

double target_band_power(const Scenario& scenario, int target_index, int ell) {
    const Waveform& w = scenario.waveform;
    if (target_index < 0 ||
        target_index >= static_cast<int>(scenario.targets.size()))
        throw std::out_of_range("target index out of range");
    if (ell < 0 || ell >= w.n_subbands)
        throw std::out_of_range("subband index out of range");
    const Target& tgt = scenario.targets[target_index];
    const int S = w.samples_per_pulse;
    const Eigen::VectorXcd pulse = transmit_pulse(w);
    const int delay = positive_mod(
        std::llround(2.0 * tgt.range_m * w.bandwidth_hz / kSpeedOfLight), S);
    Eigen::VectorXcd delayed(S);
    for (int n = 0; n < S; ++n) delayed[n] = pulse[positive_mod(n - delay, S)];
    const Eigen::MatrixXcd bands = channelize_series(delayed, w.n_subbands);
    const double amp = std::pow(10.0, tgt.gain_db / 20.0);
    return amp * amp * bands.row(ell).squaredNorm() / w.blocks_per_pulse();
}

Eigen::MatrixXcd analytic_covariance(const ArrayLayout& layout,
                                     const Scenario& scenario, int ell) {
    layout.validate();
    scenario.validate();
    const Waveform& w = scenario.waveform;
    if (ell < 0 || ell >= w.n_subbands)
        throw std::out_of_range("subband index out of range");
    const int n_el = layout.total_elems();
    const double f_ell = subband_center_hz(w, ell);

    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n_el, n_el);

    for (int k = 0; k < static_cast<int>(scenario.targets.size()); ++k) {
        const Eigen::VectorXcd a = global_steering(
            layout,
            spatial_freq_at(reference_spatial_freq(scenario.targets[k].angle),
                            f_ell, layout.design_freq_hz));
        r.noalias() += target_band_power(scenario, k, ell) * (a * a.adjoint());
    }
    for (const Interferer& j : scenario.interferers) {
        const double power = std::pow(10.0, j.inr_db / 10.0);
        if (scenario.jammer_model == JammerModel::point) {
            const Eigen::VectorXcd a = global_steering(
                layout, spatial_freq_at(reference_spatial_freq(j.angle), f_ell,
                                        layout.design_freq_hz));
            r.noalias() += power * (a * a.adjoint());
        } else {
            r.diagonal().array() += power;
        }
    }

    const double noise_power = std::pow(10.0, scenario.noise_db / 10.0);
    std::vector<double> tile_noise(layout.tile_count(), noise_power);
    if (!scenario.tile_noise_db.empty()) {
        if (static_cast<int>(scenario.tile_noise_db.size()) !=
            layout.tile_count())
            throw std::invalid_argument(
                "per-tile noise list must match the tile count");
        for (int t = 0; t < layout.tile_count(); ++t)
            tile_noise[t] = std::pow(10.0, scenario.tile_noise_db[t] / 10.0);
    }
    for (int i = 0; i < n_el; ++i)
        r(i, i) += tile_noise[i / layout.elems_per_tile()];
    return r;
}

}  // namespace tiledbeam
