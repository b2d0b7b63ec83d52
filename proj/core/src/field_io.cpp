#include "torusmfg/field_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace tmfg {

namespace {

constexpr std::array<char, 4> kMagic{'T', 'G', 'F', '1'};

template <class U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  out.write(bytes.data(), bytes.size());
}

template <class U>
U get_le(const unsigned char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(p[i]) << (8 * i);
  return value;
}

}  // namespace

void write_field(std::ostream& out, const ScalarField& f) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().dim()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(f.grid().points_per_axis()));
  for (double v : f.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw FormatError("write_field: stream write failed");
}

void write_field(const std::filesystem::path& path, const ScalarField& f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("write_field: cannot open " + path.string());
  write_field(out, f);
}

ScalarField read_field(std::istream& in) {
  std::array<unsigned char, kFieldHeaderBytes> header{};
  if (!in.read(reinterpret_cast<char*>(header.data()), header.size()))
    throw FormatError("read_field: truncated header");
  if (std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0)
    throw FormatError("read_field: bad magic (expected TGF1)");
  const auto dim = get_le<std::uint32_t>(header.data() + 4);
  const auto n = get_le<std::uint64_t>(header.data() + 8);
  if ((dim != 1 && dim != 2) || n < 8 || n % 2 != 0 || n > (1u << 20))
    throw FormatError("read_field: unsupported grid in header");
  const TorusGrid grid(static_cast<int>(dim), static_cast<int>(n));

  std::vector<double> values(grid.size());
  std::array<unsigned char, 8> buf{};
  for (double& v : values) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size()))
      throw FormatError("read_field: truncated payload");
    v = std::bit_cast<double>(get_le<std::uint64_t>(buf.data()));
  }
  return ScalarField(grid, std::move(values));
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_field: cannot open " + path.string());
  return read_field(in);
}

}  // namespace tmfg
