#include "torusmfg/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace tmfg {

namespace {

void require_same_grid(const Density& a, const Density& b, const char* op) {
  if (!(a.grid() == b.grid())) throw InvalidArgument(std::string(op) + ": densities live on different grids");
}

// Field ready for log-based functionals: floor nodes clamped, mass restored.
ScalarField log_ready(const Density& m, const char* op) {
  const ScalarField& f = m.field();
  std::size_t at_floor = 0;
  for (double v : f.values())
    if (v <= kPositivityFloor) ++at_floor;
  if (at_floor == 0) return f;
  if (static_cast<double>(at_floor) > 0.01 * static_cast<double>(f.size()))
    throw DegenerateDensity(std::string(op) + ": density vanishes on " + std::to_string(at_floor) +
                            " of " + std::to_string(f.size()) + " nodes");
  return Density::clamped(f).field();
}

double phase(const WaveVector& k, const Point& p) { return k[0] * p.x + k[1] * p.y; }

}  // namespace

// ---------------------------------------------------------------------------
// Density

Density::Density(ScalarField field) : field_(std::move(field)) {
  if (!field_.all_finite()) throw InvalidArgument("Density: non-finite values");
  if (field_.min() < 0.0) throw InvalidArgument("Density: negative values");
  const double mass = integrate(field_);
  if (std::abs(mass - 1.0) > kMassTolerance)
    throw InvalidArgument("Density: integral is " + std::to_string(mass) + ", expected 1");
}

Density Density::normalized(ScalarField field) {
  if (!field.all_finite()) throw InvalidArgument("Density::normalized: non-finite values");
  if (field.min() < 0.0) throw InvalidArgument("Density::normalized: negative values");
  const double mass = integrate(field);
  if (!(mass > 0.0)) throw InvalidArgument("Density::normalized: zero mass");
  field *= 1.0 / mass;
  return Density(std::move(field), Unchecked{});
}

Density Density::clamped(ScalarField field) {
  if (!field.all_finite()) throw InvalidArgument("Density::clamped: non-finite values");
  for (double& v : field.values()) v = std::max(v, kPositivityFloor);
  return normalized(std::move(field));
}

Density Density::uniform(const TorusGrid& grid) {
  return Density(ScalarField(grid, 1.0 / grid.volume()), Unchecked{});
}

bool Density::strictly_positive() const { return field_.min() > kPositivityFloor; }

// ---------------------------------------------------------------------------
// Functionals

double entropy(const Density& m) {
  const ScalarField f = log_ready(m, "entropy");
  return integrate(f.map([](double v) { return v * std::log(v); }));
}

double fisher_information(const Density& m) {
  const ScalarField f = log_ready(m, "fisher_information");
  ScalarField integrand = gradient(f).squared_norm();
  for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] /= f[i];
  return integrate(integrand);
}

ScalarField log_density(const Density& m) {
  return log_ready(m, "log_density").map([](double v) { return std::log(v); });
}

FourierMoment fourier_moment(const Density& m, const WaveVector& k) {
  if (k[0] == 0 && k[1] == 0) throw InvalidArgument("fourier_moment: k must be nonzero");
  if (m.grid().dim() == 1 && k[1] != 0) throw InvalidArgument("fourier_moment: k has 2 components on a 1-D grid");
  const TorusGrid& g = m.grid();
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double th = phase(k, g.node(i));
    a += std::cos(th) * m[i];
    b += std::sin(th) * m[i];
  }
  a *= g.cell_volume();
  b *= g.cell_volume();
  return {k, a, b, a * a + b * b};
}

double wasserstein1_circle(const Density& m1, const Density& m2) {
  require_same_grid(m1, m2, "wasserstein1_circle");
  if (m1.grid().dim() != 1) throw InvalidArgument("wasserstein1_circle: requires d = 1");
  const double h = m1.grid().spacing();
  const std::size_t n = m1.size();
  std::vector<double> cumulative(n);
  double running = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    running += (m1[j] - m2[j]) * h;
    cumulative[j] = running;
  }
  // Uniform weights: the weighted median is the ordinary (lower) median.
  std::vector<double> sorted = cumulative;
  auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((n - 1) / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  const double c = *mid;
  double total = 0.0;
  for (double g : cumulative) total += std::abs(g - c);
  return total * h;
}

Density m_eps_family(double eps, const WaveVector& k, const TorusGrid& grid) {
  if (!(eps > 0.0 && eps < 0.25)) throw InvalidArgument("m_eps_family: eps must lie in (0, 1/4)");
  if (k[0] == 0 && k[1] == 0) throw InvalidArgument("m_eps_family: k must be nonzero");
  if (grid.dim() == 1 && k[1] != 0) throw InvalidArgument("m_eps_family: k has 2 components on a 1-D grid");
  const double inv_vol = 1.0 / grid.volume();
  ScalarField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    f[i] = inv_vol * (1.0 + 2.0 * eps * std::cos(phase(k, grid.node(i))));
  // The nodal sum of cos(k.x) vanishes only up to rounding; restore unit mass.
  return Density::normalized(std::move(f));
}

Density von_mises(double beta, const TorusGrid& grid, double center) {
  if (!std::isfinite(beta)) throw InvalidArgument("von_mises: beta must be finite");
  ScalarField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.node(i);
    double e = beta * (std::cos(p.x - center) - 1.0);
    if (grid.dim() == 2) e += beta * (std::cos(p.y - center) - 1.0);
    f[i] = std::exp(e);
  }
  return Density::normalized(std::move(f));
}

double density_distance(const Density& m1, const Density& m2) {
  require_same_grid(m1, m2, "density_distance");
  if (m1.grid().dim() == 1) return wasserstein1_circle(m1, m2);
  double total = 0.0;
  for (std::size_t i = 0; i < m1.size(); ++i) total += std::abs(m1[i] - m2[i]);
  return total * m1.grid().cell_volume();
}

}  // namespace tmfg
