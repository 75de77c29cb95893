#include "tiledbeam/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tiledbeam {

namespace {

constexpr char kCubeMagic[8] = {'T', 'B', 'C', 'U', 'B', 'E', '0', '1'};
constexpr std::uint32_t kCubeVersion = 1;
constexpr std::uint32_t kEndianProbe = 0x01020304u;

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated cube file");
    return v;
}

}  // namespace

void write_complex_cube(const std::string& path,
                        const std::vector<Eigen::MatrixXcd>& slices) {
    if (slices.empty())
        throw std::invalid_argument("cube needs at least one slice");
    const Eigen::Index rows = slices.front().rows();
    const Eigen::Index cols = slices.front().cols();
    for (const Eigen::MatrixXcd& s : slices)
        if (s.rows() != rows || s.cols() != cols)
            throw std::invalid_argument("cube slices must share dimensions");

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write(kCubeMagic, sizeof(kCubeMagic));
    put(os, kCubeVersion);
    put(os, kEndianProbe);
    put(os, static_cast<std::uint64_t>(slices.size()));
    put(os, static_cast<std::uint64_t>(rows));
    put(os, static_cast<std::uint64_t>(cols));
    for (const Eigen::MatrixXcd& s : slices) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                put(os, s(r, c).real());
                put(os, s(r, c).imag());
            }
        }
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<Eigen::MatrixXcd> read_complex_cube(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kCubeMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a cube file: " + path);
    if (get<std::uint32_t>(is) != kCubeVersion)
        throw std::runtime_error("unsupported cube version: " + path);
    if (get<std::uint32_t>(is) != kEndianProbe)
        throw std::runtime_error("cube endianness mismatch: " + path);
    const auto n_slices = get<std::uint64_t>(is);
    const auto rows = get<std::uint64_t>(is);
    const auto cols = get<std::uint64_t>(is);
    if (n_slices == 0 || rows == 0 || cols == 0 ||
        n_slices > (1u << 20) || rows > (1u << 28) || cols > (1u << 28))
        throw std::runtime_error("implausible cube dimensions: " + path);

    std::vector<Eigen::MatrixXcd> slices(n_slices);
    for (auto& s : slices) {
        s.resize(static_cast<Eigen::Index>(rows),
                 static_cast<Eigen::Index>(cols));
        for (std::uint64_t r = 0; r < rows; ++r) {
            for (std::uint64_t c = 0; c < cols; ++c) {
                const double re = get<double>(is);
                const double im = get<double>(is);
                s(r, c) = std::complex<double>(re, im);
            }
        }
    }
    return slices;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    auto write_row = [&os](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    };
    write_row(header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("CSV row width != header width");
        write_row(row);
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& text) {
    return fnv1a64(text.data(), text.size());
}

std::uint64_t hash_file(const std::string& path) {
    return fnv1a64(read_text_file(path));
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace tiledbeam
