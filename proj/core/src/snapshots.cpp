#include "mkdvlab/snapshots.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mkdv {

namespace {

constexpr char kMagic[8] = {'M', 'K', 'D', 'V', 'S', 'N', 'A', 'P'};

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");

} // namespace

void write_snapshot(const std::string& path, const Field& f, double time) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open snapshot for writing: " + path);
    const std::uint64_t n = f.size();
    const double L = f.grid().half_length();
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&L), 8);
    out.write(reinterpret_cast<const char*>(&time), 8);
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double re = f[j].real(), im = f[j].imag();
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
    }
    if (!out) throw std::runtime_error("snapshot write failed: " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    char magic[8];
    std::uint64_t n = 0;
    double L = 0.0, time = 0.0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&L), 8);
    in.read(reinterpret_cast<char*>(&time), 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a snapshot file: " + path);
    Grid g(L, n);
    Field f(g);
    for (std::size_t j = 0; j < n; ++j) {
        double re = 0.0, im = 0.0;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        f[j] = cplx(re, im);
    }
    if (!in) throw std::runtime_error("snapshot truncated: " + path);
    return {std::move(f), time};
}

Snapshot read_snapshot(const std::string& path, const Grid& grid) {
    Snapshot s = read_snapshot(path);
    if (!(s.field.grid() == grid))
        throw std::runtime_error("snapshot grid mismatch: " + path);
    return s;
}

} // namespace mkdv
