#include "tiledbeam/array_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tiledbeam {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;
}  // namespace

void ArrayLayout::validate() const {
    if (tiles_z < 1 || tiles_x < 1 || elems_z < 1 || elems_x < 1) {
        throw std::invalid_argument(
            "ArrayLayout: tile and element counts must be >= 1");
    }
    if (!(design_freq_hz > 0.0)) {
        throw std::invalid_argument(
            "ArrayLayout: design frequency must be positive");
    }
}

SpatialFrequency reference_spatial_freq(const SourceAngle& angle) {
    if (!(angle.azimuth_rad > -kHalfPi && angle.azimuth_rad < kHalfPi) ||
        !(angle.elevation_rad > -kHalfPi && angle.elevation_rad < kHalfPi)) {
        throw std::domain_error(
            "reference_spatial_freq: angles must lie in (-pi/2, pi/2)");
    }
    return {kPi * std::cos(angle.elevation_rad) * std::sin(angle.azimuth_rad),
            kPi * std::sin(angle.elevation_rad)};
}

SpatialFrequency spatial_freq_at(const SpatialFrequency& ref, double f_hz,
                                 double f_d_hz) {
    if (!(f_hz > 0.0) || !(f_d_hz > 0.0)) {
        throw std::domain_error("spatial_freq_at: frequencies must be positive");
    }
    const double scale = f_hz / f_d_hz;
    return {scale * ref.omega_x, scale * ref.omega_z};
}

Eigen::VectorXcd steering_1d(int n, double omega) {
    if (n < 1) {
        throw std::invalid_argument("steering_1d: length must be >= 1");
    }
    Eigen::VectorXcd v(n);
    for (int m = 0; m < n; ++m) {
        v[m] = std::polar(1.0, m * omega);
    }
    v[0] = cxd(1.0, 0.0);  // exact unity phase reference
    return v;
}

Eigen::VectorXcd element_response(const ArrayLayout& layout,
                                  const SpatialFrequency& omega) {
    layout.validate();
    const Eigen::VectorXcd ux = steering_1d(layout.elems_x, omega.omega_x);
    const Eigen::VectorXcd uz = steering_1d(layout.elems_z, omega.omega_z);
    Eigen::VectorXcd out(layout.elems_per_tile());
    for (int x = 0; x < layout.elems_x; ++x) {
        for (int z = 0; z < layout.elems_z; ++z) {
            out[x * layout.elems_z + z] = ux[x] * uz[z];
        }
    }
    return out;
}

Eigen::VectorXcd tile_response(const ArrayLayout& layout,
                               const SpatialFrequency& omega) {
    layout.validate();
    const Eigen::VectorXcd ux =
        steering_1d(layout.tiles_x, layout.elems_x * omega.omega_x);
    const Eigen::VectorXcd uz =
        steering_1d(layout.tiles_z, layout.elems_z * omega.omega_z);
    Eigen::VectorXcd out(layout.tile_count());
    for (int tx = 0; tx < layout.tiles_x; ++tx) {
        for (int tz = 0; tz < layout.tiles_z; ++tz) {
            out[tx * layout.tiles_z + tz] = ux[tx] * uz[tz];
        }
    }
    return out;
}

Eigen::VectorXcd per_tile_steering(const ArrayLayout& layout,
                                   const SpatialFrequency& omega, int tile) {
    if (tile < 0 || tile >= layout.tile_count()) {
        throw std::out_of_range("per_tile_steering: tile index out of range");
    }
    return tile_response(layout, omega)[tile] * element_response(layout, omega);
}

Eigen::VectorXcd global_steering(const ArrayLayout& layout,
                                 const SpatialFrequency& omega) {
    layout.validate();
    const Eigen::VectorXcd tiles = tile_response(layout, omega);
    const Eigen::VectorXcd elems = element_response(layout, omega);
    const int n = layout.elems_per_tile();
    Eigen::VectorXcd out(layout.total_elems());
    for (int t = 0; t < layout.tile_count(); ++t) {
        out.segment(t * n, n) = tiles[t] * elems;
    }
    return out;
}

std::vector<ElementPosition> element_positions(const ArrayLayout& layout) {
    layout.validate();
    std::vector<ElementPosition> pos(layout.total_elems());
    int i = 0;
    for (int tx = 0; tx < layout.tiles_x; ++tx) {
        for (int tz = 0; tz < layout.tiles_z; ++tz) {
            for (int x = 0; x < layout.elems_x; ++x) {
                for (int z = 0; z < layout.elems_z; ++z) {
                    pos[i].z = tz * layout.elems_z + z;
                    pos[i].x = tx * layout.elems_x + x;
                    ++i;
                }
            }
        }
    }
    return pos;
}

ArrayLayout monolithic(const ArrayLayout& layout) {
    ArrayLayout mono;
    mono.tiles_z = 1;
    mono.tiles_x = 1;
    mono.elems_z = layout.tiles_z * layout.elems_z;
    mono.elems_x = layout.tiles_x * layout.elems_x;
    mono.design_freq_hz = layout.design_freq_hz;
    return mono;
}

std::vector<int> monolithic_permutation(const ArrayLayout& layout) {
    const auto pos = element_positions(layout);
    const int rows = layout.tiles_z * layout.elems_z;
    std::vector<int> perm(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
        perm[i] = pos[i].x * rows + pos[i].z;
    }
    return perm;
}

}  // namespace tiledbeam
