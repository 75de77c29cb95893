#ifndef TILEDBEAM_ARRAY_MODEL_HPP
#define TILEDBEAM_ARRAY_MODEL_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace tiledbeam {

using cxd = std::complex<double>;

/// Tiled uniform planar array: a T_z x T_x grid of tiles, each an
/// N_z x N_x subarray, with half-wavelength element pitch at the design
/// frequency.
///
/// Canonical element ordering (the single ordering used everywhere):
///   - within a tile, index e = x * N_z + z  (z varies fastest),
///   - tiles, index t = t_x * T_z + t_z      (t_z varies fastest),
///   - globally, index i = t * N + e.
struct ArrayLayout {
    int tiles_z = 1;
    int tiles_x = 1;
    int elems_z = 1;
    int elems_x = 1;
    double design_freq_hz = 10e9;

    int tile_count() const { return tiles_z * tiles_x; }
    int elems_per_tile() const { return elems_z * elems_x; }
    int total_elems() const { return tile_count() * elems_per_tile(); }

    /// Throws std::invalid_argument if any dimension is < 1 or the design
    /// frequency is not positive.
    void validate() const;
};

/// Far-field source direction. Azimuth is measured from boresight in the
/// horizontal plane, elevation from the horizontal; both must lie in the
/// open interval (-pi/2, pi/2).
struct SourceAngle {
    double azimuth_rad = 0.0;
    double elevation_rad = 0.0;
};

/// Per-element phase increments of a plane wave along the two array axes.
/// Magnitudes can exceed pi when the processing frequency is above the
/// design frequency; that aliasing is physical and not an error.
struct SpatialFrequency {
    double omega_x = 0.0;
    double omega_z = 0.0;
};

/// Reference spatial frequencies at the design frequency:
/// pi * [cos(el) * sin(az), sin(el)].
/// Throws std::domain_error if either angle is outside (-pi/2, pi/2).
SpatialFrequency reference_spatial_freq(const SourceAngle& angle);

/// Linear frequency scaling of a reference spatial frequency:
/// (f / f_d) * ref, componentwise. Throws std::domain_error on
/// non-positive frequencies.
SpatialFrequency spatial_freq_at(const SpatialFrequency& ref, double f_hz,
                                 double f_d_hz);

/// Uniform-linear-array steering vector [1, e^{j w}, ..., e^{j (n-1) w}].
Eigen::VectorXcd steering_1d(int n, double omega);

/// In-tile element response: u_{N_x}(w_x) kron u_{N_z}(w_z), length N.
Eigen::VectorXcd element_response(const ArrayLayout& layout,
                                  const SpatialFrequency& omega);

/// Phase progression across tiles: u_{T_x}(N_x w_x) kron u_{T_z}(N_z w_z),
/// length T.
Eigen::VectorXcd tile_response(const ArrayLayout& layout,
                               const SpatialFrequency& omega);

/// Steering observed by one tile (0-based index): the tile phase times the
/// in-tile element response. Throws std::out_of_range on a bad tile index.
Eigen::VectorXcd per_tile_steering(const ArrayLayout& layout,
                                   const SpatialFrequency& omega, int tile);

/// Full-aperture steering vector, length T*N: per-tile steering vectors
/// concatenated in canonical tile order. Equivalent to the monolithic
/// UPA phase ramp under the canonical element ordering.
Eigen::VectorXcd global_steering(const ArrayLayout& layout,
                                 const SpatialFrequency& omega);

/// Grid coordinates of one element on the full (T_z*N_z) x (T_x*N_x)
/// aperture.
struct ElementPosition {
    int z = 0;
    int x = 0;
};

/// Aperture coordinates of every element, indexed by the canonical global
/// index.
std::vector<ElementPosition> element_positions(const ArrayLayout& layout);

/// The same aperture viewed as a single tile (T = 1).
ArrayLayout monolithic(const ArrayLayout& layout);

/// Permutation p such that a vector v in canonical tiled ordering maps to
/// monolithic ordering via mono[p[i]] = v[i].
std::vector<int> monolithic_permutation(const ArrayLayout& layout);

}  // namespace tiledbeam

#endif  // TILEDBEAM_ARRAY_MODEL_HPP
