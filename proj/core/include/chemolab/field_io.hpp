#pragma once

#include <filesystem>

#include "chemolab/grid.hpp"

namespace chemolab {

// CPLF1 snapshot: one text line "CPLF1 <nx> <ny> <lx> <ly>\n" followed by
// nx*ny little-endian IEEE-754 doubles in row-major (j*nx + i) order.

void write_snapshot(const std::filesystem::path& path, const ScalarField& field);

/// Throws ValidationError on a bad magic, malformed header, or short payload.
ScalarField read_snapshot(const std::filesystem::path& path);

}  // namespace chemolab
