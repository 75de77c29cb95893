#include "tiledbeam/beamformer.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tiledbeam {

namespace {
constexpr double kConditionWarn = 1e12;
}

CovarianceEstimate estimate_covariance(const Eigen::MatrixXcd& snapshots,
                                       double loading_factor) {
    const Eigen::Index n = snapshots.rows();
    const Eigen::Index d = snapshots.cols();
    if (n < 1 || d < 1) {
        throw std::invalid_argument("estimate_covariance: need >= 1 snapshot");
    }
    if (loading_factor < 0.0) {
        throw std::invalid_argument("estimate_covariance: negative loading");
    }
    // Rows are y[n]^T, so sum y y^H = Y^T conj(Y).
    CovarianceEstimate est;
    est.r = (snapshots.transpose() * snapshots.conjugate()) /
            static_cast<double>(n);
    est.r = 0.5 * (est.r + est.r.adjoint().eval());
    est.n_snapshots = static_cast<int>(n);
    est.loading = loading_factor * est.r.real().trace() / static_cast<double>(d);
    est.r.diagonal().array() += est.loading;
    return est;
}

CovarianceSolver::CovarianceSolver(const CovarianceEstimate& cov)
    : llt_(cov.r) {
    if (llt_.info() != Eigen::Success) {
        throw std::runtime_error(
            "mvdr: covariance is singular (not positive definite); "
            "consider diagonal loading");
    }
    const double rcond = llt_.rcond();
    condition_ =
        rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
}

Correlator CovarianceSolver::solve(const Eigen::VectorXcd& steering,
                                   Correlator::Domain domain) const {
    if (steering.size() != llt_.matrixLLT().rows()) {
        throw std::invalid_argument("mvdr: steering/covariance dim mismatch");
    }
    if (steering.norm() == 0.0) {
        throw std::invalid_argument("mvdr: zero steering vector");
    }
    const Eigen::VectorXcd r_inv_a = llt_.solve(steering);
    const cxd denom = steering.dot(r_inv_a);  // a^H R^-1 a, real for PD R
    if (!(std::abs(denom) > 0.0) || !std::isfinite(std::abs(denom))) {
        throw std::runtime_error("mvdr: degenerate normalization");
    }
    Correlator c;
    c.weights = r_inv_a / denom;
    c.steering = steering;
    c.domain = domain;
    c.condition = condition_;
    c.near_singular = condition_ > kConditionWarn;
    return c;
}

Correlator mvdr_weights(const CovarianceEstimate& cov,
                        const Eigen::VectorXcd& steering,
                        Correlator::Domain domain) {
    return CovarianceSolver(cov).solve(steering, domain);
}

Eigen::VectorXcd mvdr_output(const Correlator& correlator,
                             const Eigen::MatrixXcd& snapshots) {
    if (snapshots.cols() != correlator.weights.size()) {
        throw std::invalid_argument("mvdr_output: snapshot/weight dim mismatch");
    }
    // Row n holds y[n]^T; c^H y[n] = y[n]^T conj(c).
    return snapshots * correlator.weights.conjugate();
}

ReducedMvdr reduced_mvdr(const ArrayLayout& layout,
                         const BeamspaceWindow& window,
                         const Eigen::MatrixXcd& snapshots,
                         const SpatialFrequency& omega, double loading_factor,
                         int train_count) {
    ReducedMvdr out;
    out.reduced = reduce_snapshots(window, layout, snapshots);
    Eigen::Index n_train = out.reduced.rows();
    if (train_count > 0 && train_count < n_train) {
        n_train = train_count;
    }
    const CovarianceEstimate cov =
        estimate_covariance(out.reduced.topRows(n_train), loading_factor);
    const Eigen::VectorXcd a = windowed_steering(layout, window, omega);
    out.correlator = mvdr_weights(cov, a, Correlator::Domain::beamspace);
    return out;
}

LiftedCorrelator lift(const Correlator& beamspace_correlator,
                      const ArrayLayout& layout,
                      const BeamspaceWindow& window) {
    const int w = window.w();
    const int n = layout.elems_per_tile();
    const int t_count = layout.tile_count();
    if (beamspace_correlator.weights.size() !=
        static_cast<Eigen::Index>(t_count) * w) {
        throw std::invalid_argument("lift: correlator length != T * W");
    }
    const Eigen::MatrixXcd b_adj = reduction_matrix(window).adjoint();
    LiftedCorrelator lifted;
    lifted.weights.resize(static_cast<Eigen::Index>(t_count) * n);
    for (int t = 0; t < t_count; ++t) {
        lifted.weights.segment(t * n, n) =
            b_adj * beamspace_correlator.weights.segment(t * w, w);
    }
    return lifted;
}

Eigen::MatrixXd beam_pattern(const Eigen::VectorXcd& element_weights,
                             const ArrayLayout& layout, double f_hz,
                             const std::vector<double>& azimuth_rad,
                             const std::vector<double>& elevation_rad) {
    const double wnorm = element_weights.norm();
    if (!(wnorm > 0.0)) {
        throw std::invalid_argument("beam_pattern: zero-norm correlator");
    }
    if (element_weights.size() != layout.total_elems()) {
        throw std::invalid_argument("beam_pattern: weight length != T * N");
    }
    Eigen::MatrixXd p(azimuth_rad.size(), elevation_rad.size());
    for (std::size_t ia = 0; ia < azimuth_rad.size(); ++ia) {
        for (std::size_t ie = 0; ie < elevation_rad.size(); ++ie) {
            const SpatialFrequency omega = spatial_freq_at(
                reference_spatial_freq({azimuth_rad[ia], elevation_rad[ie]}),
                f_hz, layout.design_freq_hz);
            const Eigen::VectorXcd a = global_steering(layout, omega);
            p(ia, ie) = std::abs(element_weights.dot(a)) / (wnorm * a.norm());
        }
    }
    return p;
}

double pattern_value(const Eigen::VectorXcd& element_weights,
                     const ArrayLayout& layout, double f_hz,
                     const SourceAngle& angle) {
    return beam_pattern(element_weights, layout, f_hz, {angle.azimuth_rad},
                        {angle.elevation_rad})(0, 0);
}

double mainlobe_width_deg(const Eigen::VectorXcd& element_weights,
                          const ArrayLayout& layout, double f_hz,
                          const SourceAngle& center, double half_span_deg,
                          int n_points) {
    if (n_points < 3 || !(half_span_deg > 0.0)) {
        throw std::invalid_argument("mainlobe_width_deg: bad sampling grid");
    }
    const double d2r = M_PI / 180.0;
    const double center_deg = center.azimuth_rad / d2r;
    std::vector<double> az(n_points);
    const double step = 2.0 * half_span_deg / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        az[i] = (center_deg - half_span_deg + i * step) * d2r;
    }
    const Eigen::MatrixXd cut = beam_pattern(element_weights, layout, f_hz, az,
                                             {center.elevation_rad});

    int peak = 0;
    for (int i = 1; i < n_points; ++i) {
        if (cut(i, 0) > cut(peak, 0)) peak = i;
    }
    const double thresh = cut(peak, 0) * std::pow(10.0, -3.0 / 20.0);

    auto edge = [&](int dir) {
        for (int i = peak + dir; i >= 0 && i < n_points; i += dir) {
            if (cut(i, 0) < thresh) {
                // Linear interpolation between the straddling samples.
                const double p0 = cut(i - dir, 0);
                const double p1 = cut(i, 0);
                const double frac = (p0 - thresh) / (p0 - p1);
                return std::abs(i - dir - peak) + frac;
            }
        }
        return static_cast<double>(dir > 0 ? n_points - 1 - peak : peak);
    };
    return (edge(+1) + edge(-1)) * step;
}

}  // namespace tiledbeam
