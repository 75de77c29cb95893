#ifndef TILEDBEAM_IO_HPP
#define TILEDBEAM_IO_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace tiledbeam {

/// Flat binary container for a stack of equally sized complex matrices
/// (one slice per subband). Little-endian; the header carries a magic
/// tag, a format version, an endianness probe, and the three dimensions,
/// followed by row-major interleaved re/im doubles.
void write_complex_cube(const std::string& path,
                        const std::vector<Eigen::MatrixXcd>& slices);

/// Reads a cube written by write_complex_cube. Throws std::runtime_error
/// on missing files or a malformed header.
std::vector<Eigen::MatrixXcd> read_complex_cube(const std::string& path);

/// Deterministic shortest-round-trip formatting for CSV/JSON payloads.
/// Infinities and NaN become "inf", "-inf", "nan".
std::string format_double(double v);

/// Writes one CSV file; every row must match the header width.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// FNV-1a 64-bit, used for manifest content hashes.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& text);
std::uint64_t hash_file(const std::string& path);

/// Hash rendered as a fixed-width hex string for manifests.
std::string hash_hex(std::uint64_t h);

}  // namespace tiledbeam

#endif  // TILEDBEAM_IO_HPP
