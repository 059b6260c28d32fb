#pragma once

#include "mkdvlab/grid.hpp"

#include <string>

namespace mkdv {

/// Binary snapshot format: a 32-byte header -- 8-byte magic "MKDVSNAP",
/// uint64 point count, float64 half-length, float64 time, all
/// little-endian -- followed by 2n little-endian float64 values
/// (interleaved re, im).
void write_snapshot(const std::string& path, const Field& f, double time);

struct Snapshot {
    Field field;
    double time;
};

Snapshot read_snapshot(const std::string& path);
Snapshot read_snapshot(const std::string& path, const Grid& grid);

} // namespace mkdv
