#ifndef TILEDBEAM_SCENE_HPP
#define TILEDBEAM_SCENE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tiledbeam/array_model.hpp"

namespace tiledbeam {

struct Target {
    SourceAngle angle;
    double range_m = 0.0;
    double velocity_mps = 0.0;
    double gain_db = 0.0;
};

struct Interferer {
    SourceAngle angle;
    double inr_db = 0.0;  ///< interference-to-target power ratio
};

/// Wideband pulsed waveform and CPI parameters. The transmit pulse is a
/// full-window discrete linear-FM chirp spanning the bandwidth (constant
/// envelope when `chirp` is false); complex baseband sampling at rate B.
struct Waveform {
    double carrier_hz = 10e9;
    double bandwidth_hz = 100e6;
    int n_subbands = 8;
    int pulses_per_cpi = 16;
    int samples_per_pulse = 256;
    double prf_hz = 20e3;
    bool chirp = true;

    int blocks_per_pulse() const { return samples_per_pulse / n_subbands; }
    int snapshots_per_subband() const {
        return pulses_per_cpi * blocks_per_pulse();
    }
    double range_bin_m() const;         ///< c / (2 B)
    double unambiguous_range_m() const; ///< samples_per_pulse * range_bin_m
    double velocity_bin_mps() const;    ///< lambda * PRF / (2 M)
    double unambiguous_velocity_mps() const;

    /// Throws std::invalid_argument on non-positive parameters or when the
    /// subband count does not divide the pulse length.
    void validate() const;
};

/// How interferer samples map onto the array.
enum class JammerModel {
    point,          ///< rank-1: one symbol stream through the jammer steering
    element_white,  ///< independent samples per element (full spatial rank)
};

struct Scenario {
    std::vector<Target> targets;
    std::vector<Interferer> interferers;
    double noise_db = 0.0;  ///< 10 log10 of per-element noise power
    std::vector<double> tile_noise_db;  ///< optional per-tile override
    JammerModel jammer_model = JammerModel::point;
    Waveform waveform;
    std::string name = "inline";

    /// Validates the waveform and checks targets against the unambiguous
    /// range/velocity extents.
    void validate() const;
};

/// Per-subband element-space snapshot cubes for one CPI. Row n of subband
/// ell holds the snapshot y[n]^T at index n = pulse * blocks_per_pulse +
/// block, columns in canonical tiled element order.
struct SubbandSnapshots {
    std::vector<Eigen::MatrixXcd> subband;  ///< L matrices [n x T*N]
    std::vector<double> center_hz;          ///< absolute subband centers
    double noise_power = 0.0;               ///< sigma^2 (uniform reference)
};

/// Ground truth retained from synthesis for the detection back-end.
struct TargetTruth {
    int range_bin = 0;     ///< circular delay in fast-time samples
    int velocity_bin = 0;  ///< Doppler DFT bin, 0..M-1
    SpatialFrequency omega_ref;
    double range_m = 0.0;
    double velocity_mps = 0.0;
    double gain_db = 0.0;
};

struct SceneTruth {
    std::vector<TargetTruth> targets;
};

/// Absolute center frequency of subband ell: the carrier plus the signed
/// baseband offset of FFT bin ell (bins above L/2 wrap negative).
double subband_center_hz(const Waveform& w, int ell);

/// Baseband transmit pulse, length samples_per_pulse. The chirp is
/// p[n] = exp(j pi n^2 / S), which sweeps the full bandwidth and has a
/// perfectly flat spectrum for even S.
Eigen::VectorXcd transmit_pulse(const Waveform& w);

/// Splits one wideband series into L subband streams: non-overlapping
/// L-point blocks, unitary FFT per block, bin ell collected across blocks.
/// Returns [L x len/L]. Throws std::invalid_argument when L does not
/// divide the length.
Eigen::MatrixXcd channelize_series(const Eigen::VectorXcd& series, int L);

/// Channelizes per-element wideband data [n_samples x n_elements] into
/// per-subband snapshot cubes.
SubbandSnapshots channelize(const Eigen::MatrixXcd& element_series,
                            const Waveform& w);

/// Synthesizes the per-subband received data for a scenario directly in
/// the subband domain: delayed/Doppler-shifted channelized pulse returns
/// through frequency-scaled steering vectors, plus jammers and noise.
/// Deterministic in (scenario, seed); every (subband, pulse) pair draws
/// from its own counter-derived RNG stream so any parallel split over
/// those axes reproduces the serial result bit-exactly.
SubbandSnapshots synthesize(const ArrayLayout& layout, const Scenario& scenario,
                            std::uint64_t seed, SceneTruth* truth = nullptr);

/// Named desk-scale scenario fixtures. "A1-like": few jammers, targets
/// well separated from the horizon in elevation, 120 dB INR. "E2-like":
/// many jammers, every source within a few degrees of the horizon, 80 dB
/// INR. `scale` multiplies target ranges (must be > 0). Unknown names
/// throw std::invalid_argument.
Scenario scenario_library(const std::string& name, double scale = 1.0);

std::vector<std::string> scenario_library_names();

/// Snapshot-averaged power a target deposits into one subband: the gain
/// times the mean squared magnitude of its delayed channelized pulse row.
double target_band_power(const Scenario& scenario, int target_index, int ell);

/// Ground-truth (infinite-snapshot) covariance of one subband: signal
/// powers from the deterministic channelized pulse energies, jammer terms
/// per the configured spatial model, and the noise diagonal. Sources are
/// modeled as mutually uncorrelated. Test support; the processing
/// pipeline never uses it.
Eigen::MatrixXcd analytic_covariance(const ArrayLayout& layout,
                                     const Scenario& scenario, int ell);

/// SplitMix64-style avalanche used to derive per-stream RNG seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace tiledbeam

#endif  // TILEDBEAM_SCENE_HPP
