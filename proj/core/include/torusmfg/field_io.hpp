#pragma once

// Binary grid-field format "TGF1".
//
//   offset  size  content
//   0       4     magic "TGF1"
//   4       4     d, uint32 little-endian
//   8       8     N, uint64 little-endian
//   16      8*N^d values, IEEE-754 binary64 little-endian, row-major (x outermost)

#include <filesystem>
#include <iosfwd>

#include "torusmfg/torus_grid.hpp"

namespace tmfg {

inline constexpr std::size_t kFieldHeaderBytes = 16;

void write_field(std::ostream& out, const ScalarField& f);
void write_field(const std::filesystem::path& path, const ScalarField& f);

/// Throws FormatError on a bad magic, unsupported grid or truncated payload.
ScalarField read_field(std::istream& in);
ScalarField read_field(const std::filesystem::path& path);

}  // namespace tmfg
