#ifndef TILEDBEAM_BEAMSPACE_HPP
#define TILEDBEAM_BEAMSPACE_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tiledbeam/array_model.hpp"

namespace tiledbeam {

/// Unitary n-point DFT matrix, entries e^{-j 2 pi m k / n} / sqrt(n).
Eigen::MatrixXcd unitary_dft_matrix(int n);

/// Per-tile 2D beamspace transform D = D_{N_x} kron D_{N_z} (the N-point
/// DFT matrix is symmetric, so the transpose in the Kronecker factor is a
/// no-op). Acts on tile snapshots in canonical in-tile ordering.
Eigen::MatrixXcd tile_dft_matrix(int n_z, int n_x);

/// Applies the tile beamspace transform to one tile snapshot (length
/// N_z*N_x). Norm preserving. Throws std::invalid_argument on a length
/// mismatch.
Eigen::VectorXcd dft_2d(const ArrayLayout& layout,
                        const Eigen::VectorXcd& tile_snapshot);

/// Contiguous (circular) DFT-bin selection per axis, centered at the
/// rounded beamspace location of a target direction. The same window is
/// applied to every tile.
struct BeamspaceWindow {
    int n_z = 0;  ///< tile axis lengths the window was planned for
    int n_x = 0;
    int center_z = 0;
    int center_x = 0;
    std::vector<int> bins_z;  ///< consecutive indices mod n_z
    std::vector<int> bins_x;  ///< consecutive indices mod n_x
    int target_id = -1;       ///< optional metadata
    int subband = -1;

    int w_z() const { return static_cast<int>(bins_z.size()); }
    int w_x() const { return static_cast<int>(bins_x.size()); }
    int w() const { return w_z() * w_x(); }
};

/// Plans the W_z x W_x window for a target whose spatial frequency at the
/// processing frequency is `omega`. Center bin per axis is
/// round(N * omega / (2 pi)) mod N; an even window takes the extra bin on
/// the increasing-index side. A full-axis window selects bins in natural
/// order. Throws std::invalid_argument when a window exceeds its axis.
BeamspaceWindow plan_window(const ArrayLayout& layout,
                            const SpatialFrequency& omega, int w_z, int w_x);

/// Extracts the W selected beamspace coefficients in canonical order
/// (x-outer, z-inner).
Eigen::VectorXcd apply_window(const BeamspaceWindow& window,
                              const Eigen::VectorXcd& beamspace);

/// The W x N reduction operator B = S D for one tile: row (j, i) of the
/// selector picks DFT bin (bins_x[j], bins_z[i]).
Eigen::MatrixXcd reduction_matrix(const BeamspaceWindow& window);

/// dft_2d followed by apply_window on one tile snapshot.
Eigen::VectorXcd reduce_tile(const BeamspaceWindow& window,
                             const ArrayLayout& layout,
                             const Eigen::VectorXcd& tile_snapshot);

/// Blockwise reduction of a stacked snapshot (length T*N) with the same
/// window on every tile; output length T*W.
Eigen::VectorXcd reduce_global(const BeamspaceWindow& window,
                               const ArrayLayout& layout,
                               const Eigen::VectorXcd& stacked);

/// Row-wise reduction of a snapshot matrix [n x T*N] -> [n x T*W].
Eigen::MatrixXcd reduce_snapshots(const BeamspaceWindow& window,
                                  const ArrayLayout& layout,
                                  const Eigen::MatrixXcd& snapshots);

/// Windowed beamspace steering vector: reduce_global applied to the
/// global steering vector at `omega`.
Eigen::VectorXcd windowed_steering(const ArrayLayout& layout,
                                   const BeamspaceWindow& window,
                                   const SpatialFrequency& omega);

/// JSON description of a window plan (target id, subband, bin lists), for
/// debugging dumps.
std::string window_to_json(const BeamspaceWindow& window);

}  // namespace tiledbeam

#endif  // TILEDBEAM_BEAMSPACE_HPP
