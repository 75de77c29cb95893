#include "tiledbeam/beamspace.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tiledbeam {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int positive_mod(long long v, int m) {
    const long long r = v % m;
    return static_cast<int>(r < 0 ? r + m : r);
}

std::vector<int> axis_bins(double omega, int n, int w) {
    if (w < 1 || w > n) {
        throw std::invalid_argument("plan_window: window must satisfy 1 <= W <= N");
    }
    // Full-axis windows keep natural bin order so the selection is an
    // identity, not a rotation.
    std::vector<int> bins(w);
    if (w == n) {
        for (int i = 0; i < n; ++i) bins[i] = i;
        return bins;
    }
    const long long center =
        static_cast<long long>(std::llround(n * omega / kTwoPi));
    const int lo = -((w - 1) / 2);  // even W: extra bin on the positive side
    for (int i = 0; i < w; ++i) {
        bins[i] = positive_mod(center + lo + i, n);
    }
    return bins;
}
}  // namespace

Eigen::MatrixXcd unitary_dft_matrix(int n) {
    if (n < 1) {
        throw std::invalid_argument("unitary_dft_matrix: n must be >= 1");
    }
    Eigen::MatrixXcd d(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
            d(m, k) = scale * std::polar(1.0, -kTwoPi * m * k / n);
        }
    }
    return d;
}

Eigen::MatrixXcd tile_dft_matrix(int n_z, int n_x) {
    const Eigen::MatrixXcd dx = unitary_dft_matrix(n_x);
    const Eigen::MatrixXcd dz = unitary_dft_matrix(n_z);
    const int n = n_z * n_x;
    Eigen::MatrixXcd d(n, n);
    for (int rx = 0; rx < n_x; ++rx) {
        for (int rz = 0; rz < n_z; ++rz) {
            for (int cx = 0; cx < n_x; ++cx) {
                for (int cz = 0; cz < n_z; ++cz) {
                    d(rx * n_z + rz, cx * n_z + cz) = dx(rx, cx) * dz(rz, cz);
                }
            }
        }
    }
    return d;
}

Eigen::VectorXcd dft_2d(const ArrayLayout& layout,
                        const Eigen::VectorXcd& tile_snapshot) {
    const int nz = layout.elems_z;
    const int nx = layout.elems_x;
    if (tile_snapshot.size() != nz * nx) {
        throw std::invalid_argument("dft_2d: snapshot length != N_z * N_x");
    }
    // Separable transform: z-axis DFT on each column, then x-axis DFT
    // across columns.
    Eigen::Map<const Eigen::MatrixXcd> grid(tile_snapshot.data(), nz, nx);
    const Eigen::MatrixXcd dz = unitary_dft_matrix(nz);
    const Eigen::MatrixXcd dx = unitary_dft_matrix(nx);
    const Eigen::MatrixXcd out = dz * grid * dx.transpose();
    return Eigen::Map<const Eigen::VectorXcd>(out.data(), nz * nx);
}

BeamspaceWindow plan_window(const ArrayLayout& layout,
                            const SpatialFrequency& omega, int w_z, int w_x) {
    layout.validate();
    BeamspaceWindow win;
    win.n_z = layout.elems_z;
    win.n_x = layout.elems_x;
    win.center_z = positive_mod(
        std::llround(win.n_z * omega.omega_z / kTwoPi), win.n_z);
    win.center_x = positive_mod(
        std::llround(win.n_x * omega.omega_x / kTwoPi), win.n_x);
    win.bins_z = axis_bins(omega.omega_z, win.n_z, w_z);
    win.bins_x = axis_bins(omega.omega_x, win.n_x, w_x);
    return win;
}

Eigen::VectorXcd apply_window(const BeamspaceWindow& window,
                              const Eigen::VectorXcd& beamspace) {
    const int n = window.n_z * window.n_x;
    if (beamspace.size() != n) {
        throw std::invalid_argument("apply_window: beamspace length != N");
    }
    Eigen::VectorXcd out(window.w());
    int o = 0;
    for (int bx : window.bins_x) {
        for (int bz : window.bins_z) {
            out[o++] = beamspace[bx * window.n_z + bz];
        }
    }
    return out;
}

Eigen::MatrixXcd reduction_matrix(const BeamspaceWindow& window) {
    const Eigen::MatrixXcd dz = unitary_dft_matrix(window.n_z);
    const Eigen::MatrixXcd dx = unitary_dft_matrix(window.n_x);
    Eigen::MatrixXcd b(window.w(), window.n_z * window.n_x);
    int r = 0;
    for (int bx : window.bins_x) {
        for (int bz : window.bins_z) {
            for (int cx = 0; cx < window.n_x; ++cx) {
                for (int cz = 0; cz < window.n_z; ++cz) {
                    b(r, cx * window.n_z + cz) = dx(bx, cx) * dz(bz, cz);
                }
            }
            ++r;
        }
    }
    return b;
}

Eigen::VectorXcd reduce_tile(const BeamspaceWindow& window,
                             const ArrayLayout& layout,
                             const Eigen::VectorXcd& tile_snapshot) {
    return apply_window(window, dft_2d(layout, tile_snapshot));
}

Eigen::VectorXcd reduce_global(const BeamspaceWindow& window,
                               const ArrayLayout& layout,
                               const Eigen::VectorXcd& stacked) {
    const int n = layout.elems_per_tile();
    const int t_count = layout.tile_count();
    if (stacked.size() != static_cast<Eigen::Index>(t_count) * n) {
        throw std::invalid_argument("reduce_global: snapshot length != T * N");
    }
    const int w = window.w();
    Eigen::VectorXcd out(t_count * w);
    for (int t = 0; t < t_count; ++t) {
        out.segment(t * w, w) =
            reduce_tile(window, layout, stacked.segment(t * n, n));
    }
    return out;
}

Eigen::MatrixXcd reduce_snapshots(const BeamspaceWindow& window,
                                  const ArrayLayout& layout,
                                  const Eigen::MatrixXcd& snapshots) {
    const int n = layout.elems_per_tile();
    const int t_count = layout.tile_count();
    if (snapshots.cols() != static_cast<Eigen::Index>(t_count) * n) {
        throw std::invalid_argument("reduce_snapshots: column count != T * N");
    }
    const int w = window.w();
    // One W x N operator per tile block; applied as a matrix product over
    // all snapshots at once.
    const Eigen::MatrixXcd b = reduction_matrix(window);
    Eigen::MatrixXcd out(snapshots.rows(), t_count * w);
    for (int t = 0; t < t_count; ++t) {
        out.middleCols(t * w, w) =
            snapshots.middleCols(t * n, n) * b.transpose();
    }
    return out;
}

Eigen::VectorXcd windowed_steering(const ArrayLayout& layout,
                                   const BeamspaceWindow& window,
                                   const SpatialFrequency& omega) {
    return reduce_global(window, layout, global_steering(layout, omega));
}

std::string window_to_json(const BeamspaceWindow& window) {
    std::ostringstream os;
    os << "{\"target_id\":" << window.target_id
       << ",\"subband\":" << window.subband << ",\"center\":["
       << window.center_z << "," << window.center_x << "],\"bins_z\":[";
    for (std::size_t i = 0; i < window.bins_z.size(); ++i) {
        os << (i ? "," : "") << window.bins_z[i];
    }
    os << "],\"bins_x\":[";
    for (std::size_t i = 0; i < window.bins_x.size(); ++i) {
        os << (i ? "," : "") << window.bins_x[i];
    }
    os << "]}";
    return os.str();
}

}  // namespace tiledbeam
