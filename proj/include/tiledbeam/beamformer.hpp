#ifndef TILEDBEAM_BEAMFORMER_HPP
#define TILEDBEAM_BEAMFORMER_HPP

#include <Eigen/Dense>

#include "tiledbeam/array_model.hpp"
#include "tiledbeam/beamspace.hpp"

namespace tiledbeam {

/// Diagonally loaded sample covariance. `loading` is the absolute value
/// added to the diagonal (loading_factor * trace / d).
struct CovarianceEstimate {
    Eigen::MatrixXcd r;
    int n_snapshots = 0;
    double loading = 0.0;

    int dim() const { return static_cast<int>(r.rows()); }
};

/// (1/n) sum y y^H over the rows of `snapshots` [n x d], symmetrized, plus
/// loading_factor * trace / d on the diagonal. Throws std::invalid_argument
/// on an empty snapshot matrix.
CovarianceEstimate estimate_covariance(const Eigen::MatrixXcd& snapshots,
                                       double loading_factor);

/// Distortionless correlator: weights^H steering == 1.
struct Correlator {
    enum class Domain { element, beamspace };

    Eigen::VectorXcd weights;
    Eigen::VectorXcd steering;  ///< constraint direction it was built for
    Domain domain = Domain::element;
    double condition = 0.0;      ///< 1-norm condition estimate of the covariance
    bool near_singular = false;  ///< condition above 1e12
};

/// Cholesky factorization of a covariance, reusable across several
/// steering directions. Throws std::runtime_error when the matrix is not
/// positive definite; a merely ill-conditioned one (condition estimate
/// > 1e12) is only flagged on the correlators it produces.
class CovarianceSolver {
  public:
    explicit CovarianceSolver(const CovarianceEstimate& cov);

    /// Solves R c0 = a and normalizes to c = c0 / (a^H c0).
    Correlator solve(
        const Eigen::VectorXcd& steering,
        Correlator::Domain domain = Correlator::Domain::element) const;

    double condition() const { return condition_; }

  private:
    Eigen::LLT<Eigen::MatrixXcd> llt_;
    double condition_ = 0.0;
};

/// One-shot convenience wrapper around CovarianceSolver.
Correlator mvdr_weights(const CovarianceEstimate& cov,
                        const Eigen::VectorXcd& steering,
                        Correlator::Domain domain = Correlator::Domain::element);

/// Beamformer output series c^H y[n] over the rows of `snapshots`.
Eigen::VectorXcd mvdr_output(const Correlator& correlator,
                             const Eigen::MatrixXcd& snapshots);

/// Result of the reduced-dimension MVDR stage: the beamspace correlator
/// plus the reduced snapshot cube it was trained on.
struct ReducedMvdr {
    Correlator correlator;
    Eigen::MatrixXcd reduced;  ///< [n x T*W]
};

/// Windowed-beamspace MVDR: reduces the stacked element-space snapshots
/// [n x T*N], estimates the T*W covariance from the first `train_count`
/// reduced snapshots (0 = all), and solves against the windowed steering
/// vector at `omega`.
ReducedMvdr reduced_mvdr(const ArrayLayout& layout,
                         const BeamspaceWindow& window,
                         const Eigen::MatrixXcd& snapshots,
                         const SpatialFrequency& omega, double loading_factor,
                         int train_count = 0);

/// Beamspace correlator mapped back to element space through the adjoint
/// of the per-tile reduction operator, applied blockwise.
struct LiftedCorrelator {
    Eigen::VectorXcd weights;  ///< length T*N
};

LiftedCorrelator lift(const Correlator& beamspace_correlator,
                      const ArrayLayout& layout,
                      const BeamspaceWindow& window);

/// Normalized beam response |<c, a(az, el)>| / (|c| |a|) over an angle
/// grid, evaluated at processing frequency `f_hz`. Rows follow the
/// azimuth grid, columns the elevation grid; values lie in [0, 1].
/// Throws std::invalid_argument on a zero-norm correlator.
Eigen::MatrixXd beam_pattern(const Eigen::VectorXcd& element_weights,
                             const ArrayLayout& layout, double f_hz,
                             const std::vector<double>& azimuth_rad,
                             const std::vector<double>& elevation_rad);

/// Single-direction sample of beam_pattern.
double pattern_value(const Eigen::VectorXcd& element_weights,
                     const ArrayLayout& layout, double f_hz,
                     const SourceAngle& angle);

/// -3 dB width, in degrees, of the azimuth cut through `center`. The cut
/// is sampled on [-half_span, +half_span] degrees around the center
/// azimuth at the center's elevation; the width brackets the strongest
/// sample with linear interpolation at the crossing. Returns the full
/// span when the response never falls 3 dB below the peak inside it.
double mainlobe_width_deg(const Eigen::VectorXcd& element_weights,
                          const ArrayLayout& layout, double f_hz,
                          const SourceAngle& center,
                          double half_span_deg = 20.0, int n_points = 2001);

}  // namespace tiledbeam

#endif  // TILEDBEAM_BEAMFORMER_HPP
