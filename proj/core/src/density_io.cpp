#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "torusmfg/measures.hpp"

namespace tmfg {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    std::string_view cell = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
      cell.remove_suffix(1);
    out.push_back(cell);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_cell(std::string_view cell, int line, const char* column) {
  T value{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw FormatError("density CSV line " + std::to_string(line) + ": bad " + column + " value '" +
                          std::string(cell) + "'",
                      line);
  return value;
}

struct Row {
  int line;
  int i;
  int j;
  double x;
  double y;
  double m;
};

}  // namespace

void write_density_csv(std::ostream& out, const Density& m) {
  const TorusGrid& g = m.grid();
  const int n = g.points_per_axis();
  char buf[160];
  out << (g.dim() == 1 ? "i,x,m\n" : "i,j,x,y,m\n");
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Point p = g.node(idx);
    if (g.dim() == 1) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", idx, p.x, m[idx]);
    } else {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g\n", idx / n, idx % n, p.x, p.y, m[idx]);
    }
    out << buf;
  }
}

void write_density_csv(const std::filesystem::path& path, const Density& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_density_csv(out, m);
}

Density read_density_csv(std::istream& in, double mass_tolerance) {
  std::string line;
  int line_no = 0;
  int dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_commas(line);
    if (cells.size() == 3 && cells[0] == "i" && cells[1] == "x" && cells[2] == "m") {
      dim = 1;
    } else if (cells.size() == 5 && cells[0] == "i" && cells[1] == "j" && cells[2] == "x" &&
               cells[3] == "y" && cells[4] == "m") {
      dim = 2;
    } else {
      throw FormatError("density CSV line " + std::to_string(line_no) +
                            ": expected header 'i,x,m' or 'i,j,x,y,m'",
                        line_no);
    }
    break;
  }
  if (dim == 0) throw FormatError("density CSV: empty input");

  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_commas(line);
    const std::size_t expected = dim == 1 ? 3 : 5;
    if (cells.size() != expected)
      throw FormatError("density CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(expected) + " columns, got " + std::to_string(cells.size()),
                        line_no);
    Row r{line_no, 0, 0, 0.0, 0.0, 0.0};
    if (dim == 1) {
      r.i = parse_cell<int>(cells[0], line_no, "i");
      r.x = parse_cell<double>(cells[1], line_no, "x");
      r.m = parse_cell<double>(cells[2], line_no, "m");
    } else {
      r.i = parse_cell<int>(cells[0], line_no, "i");
      r.j = parse_cell<int>(cells[1], line_no, "j");
      r.x = parse_cell<double>(cells[2], line_no, "x");
      r.y = parse_cell<double>(cells[3], line_no, "y");
      r.m = parse_cell<double>(cells[4], line_no, "m");
    }
    if (!std::isfinite(r.m) || r.m < 0.0)
      throw FormatError("density CSV line " + std::to_string(line_no) + ": m must be finite and >= 0",
                        line_no);
    rows.push_back(r);
  }

  int n = static_cast<int>(rows.size());
  if (dim == 2) {
    n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rows.size()))));
    if (static_cast<std::size_t>(n) * n != rows.size())
      throw FormatError("density CSV: row count " + std::to_string(rows.size()) + " is not a square");
  }
  if (n < 8 || n % 2 != 0)
    throw FormatError("density CSV: " + std::to_string(n) + " points per axis (need even and >= 8)");
  const TorusGrid grid(dim, n);

  std::vector<double> values(grid.size());
  for (std::size_t idx = 0; idx < rows.size(); ++idx) {
    const Row& r = rows[idx];
    const int ei = dim == 1 ? static_cast<int>(idx) : static_cast<int>(idx / n);
    const int ej = dim == 1 ? 0 : static_cast<int>(idx % n);
    if (r.i != ei || r.j != ej)
      throw FormatError("density CSV line " + std::to_string(r.line) + ": index out of order", r.line);
    const Point p = grid.node(idx);
    if (std::abs(r.x - p.x) > 1e-9 || std::abs(r.y - p.y) > 1e-9)
      throw FormatError("density CSV line " + std::to_string(r.line) + ": coordinate does not match the grid",
                        r.line);
    values[idx] = r.m;
  }
  ScalarField field(grid, std::move(values));
  const double mass = integrate(field);
  if (std::abs(mass - 1.0) > mass_tolerance)
    throw FormatError("density CSV: total mass " + std::to_string(mass) + " differs from 1");
  return Density::normalized(std::move(field));
}

Density read_density_csv(const std::filesystem::path& path, double mass_tolerance) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_density_csv(in, mass_tolerance);
}

}  // namespace tmfg
