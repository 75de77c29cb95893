#ifndef TILEDBEAM_DETECTOR_HPP
#define TILEDBEAM_DETECTOR_HPP

#include <Eigen/Dense>
#include <vector>

#include "tiledbeam/scene.hpp"

namespace tiledbeam {

/// Range-Doppler power map for one beam. Rows are range bins in fast-time
/// order; columns are velocity bins reordered so the velocity axis runs
/// monotonically from -unambiguous/2 upward.
struct RangeDopplerMap {
    Eigen::MatrixXd power;         ///< [S x M]
    Eigen::VectorXd range_m;       ///< range of each row
    Eigen::VectorXd velocity_mps;  ///< velocity of each column
};

/// Cell-averaging CFAR along the range axis, one sweep per velocity
/// column. The training window wraps circularly in range, which keeps
/// the false-alarm statistics identical at every cell.
struct CfarParams {
    int guard_cells = 2;        ///< per side
    int train_cells = 8;        ///< per side
    double threshold_db = 10.0;

    /// Exact false-alarm probability for unit-mean exponential cells:
    /// (1 + tau/N)^{-N} with N total training cells.
    double false_alarm_probability() const;
    void validate() const;
};

struct Detection {
    int range_bin = 0;
    int velocity_index = 0;  ///< column of the shifted velocity axis
    double range_m = 0.0;
    double velocity_mps = 0.0;
    double power = 0.0;
    double sinr_db = 0.0;  ///< peak over CFAR noise estimate
};

/// Per-target outcome after associating detections with ground truth.
struct TargetReport {
    int target_id = 0;
    bool detected = false;
    double range_err_m = 0.0;
    double velocity_err_mps = 0.0;
    double sinr_db = 0.0;
};

/// Recombines per-subband beamformer output streams into the wideband
/// fast-time series, inverting the block channelizer. Input: L series,
/// each pulses*blocks long in snapshot order. Output: [S x M], one
/// column per pulse.
Eigen::MatrixXcd synthesize_wideband(
    const std::vector<Eigen::VectorXcd>& subband_series, const Waveform& w);

/// Pulse compression plus Doppler integration. Matched filtering is
/// circular against the transmit pulse (normalized by 1/S), the Doppler
/// transform a 1/M-normalized DFT across pulses, so a unit-gain point
/// return lands at unit amplitude in its cell.
RangeDopplerMap range_doppler(const Eigen::MatrixXcd& pulses,
                              const Waveform& w);

/// CFAR hit mask over an arbitrary power map (rows treated as the
/// circular range axis). Throws std::invalid_argument when the stencil
/// does not fit the map height.
Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> cfar_mask(
    const Eigen::MatrixXd& power, const CfarParams& params);

/// CFAR hits reduced to local peaks (8-neighborhood, both axes wrapped),
/// with per-detection SINR estimated against the training mean.
std::vector<Detection> cfar_detect(const RangeDopplerMap& map,
                                   const CfarParams& params);

/// Associates detections with ground-truth targets: a target counts as
/// detected when some hit lies within one bin of its true cell on both
/// axes (circularly); the strongest such hit supplies the errors. Missed
/// targets report infinite errors and -inf SINR.
std::vector<TargetReport> evaluate(const std::vector<Detection>& detections,
                                   const SceneTruth& truth, const Waveform& w);

/// Detection SINR at a target's true cell, defined whether or not the
/// cell crossed the CFAR threshold: the strongest power within one bin of
/// the true (range, velocity) cell over the CFAR training mean around
/// that peak.
double truth_cell_sinr_db(const RangeDopplerMap& map, const TargetTruth& truth,
                          const Waveform& w, const CfarParams& params);

/// Narrowband output SINR (dB) of element-space weights in one subband:
/// the designated target's power through the weights over the
/// interference-plus-noise power drawn from the ground-truth covariance
/// with every target removed.
double output_sinr_db(const Eigen::VectorXcd& weights,
                      const ArrayLayout& layout, const Scenario& scenario,
                      int ell, int target_index);

}  // namespace tiledbeam

#endif  // TILEDBEAM_DETECTOR_HPP
