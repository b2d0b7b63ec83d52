#pragma once

// Probability densities on the torus and the functionals evaluated on them:
// entropy, Fisher information, Fourier moments, and two metrics (the exact
// circular Wasserstein-1 distance in d = 1 and the bounded-Lipschitz distance
// as a linear program on small grids).

#include <filesystem>
#include <iosfwd>

#include "torusmfg/torus_grid.hpp"

namespace tmfg {

/// Nodes at or below this value are treated as vanishing.
inline constexpr double kPositivityFloor = 1e-12;
/// A Density's integral must equal 1 within this tolerance.
inline constexpr double kMassTolerance = 1e-10;

/// Nonnegative grid function with unit integral; m(x) dx is the measure.
class Density {
 public:
  /// Validates: finite, m >= 0 everywhere, |integral - 1| <= kMassTolerance.
  explicit Density(ScalarField field);

  /// Rescale a nonnegative field with positive mass to unit integral.
  static Density normalized(ScalarField field);
  /// Clamp values below kPositivityFloor up to the floor, then renormalize.
  /// Intended for solver output, whose undershoots are rounding noise.
  static Density clamped(ScalarField field);
  static Density uniform(const TorusGrid& grid);

  const TorusGrid& grid() const noexcept { return field_.grid(); }
  const ScalarField& field() const noexcept { return field_; }
  std::size_t size() const noexcept { return field_.size(); }
  double operator[](std::size_t i) const noexcept { return field_[i]; }

  /// min_j m_j > kPositivityFloor.
  bool strictly_positive() const;

 private:
  struct Unchecked {};
  Density(ScalarField field, Unchecked) : field_(std::move(field)) {}

  ScalarField field_;
};

struct FourierMoment {
  WaveVector k{};
  double a = 0.0;  // integral of cos(k.x) m(x) dx
  double b = 0.0;  // integral of sin(k.x) m(x) dx
  double q = 0.0;  // a^2 + b^2
};

/// Integral of m log m. Throws DegenerateDensity when more than 1% of nodes sit
/// at or below the positivity floor; isolated floor nodes are clamped first.
double entropy(const Density& m);

/// Integral of |grad m|^2 / m, same degeneracy rule as entropy().
double fisher_information(const Density& m);

/// Nodal log m, same degeneracy rule as entropy().
ScalarField log_density(const Density& m);

/// Throws InvalidArgument for k = 0 (or k[1] != 0 on a 1-D grid).
FourierMoment fourier_moment(const Density& m, const WaveVector& k);

/// Exact Wasserstein-1 distance between the node-supported measures
/// sum_j m_j h delta_{x_j} on the circle: h * sum_j |G_j - median(G)| with
/// G the cumulative mass difference. Throws InvalidArgument unless d = 1.
double wasserstein1_circle(const Density& m1, const Density& m2);

/// Largest N^d accepted by bounded_lipschitz_distance().
inline constexpr std::size_t kBoundedLipschitzMaxNodes = 4096;

/// sup { sum_j f_j (m1_j - m2_j) h^d : |f_j| <= s, |f_i - f_j| <= (1 - s) dist(x_i, x_j)
/// for grid neighbours, 0 <= s <= 1 }, solved exactly. Throws InvalidArgument when the
/// grid has more than kBoundedLipschitzMaxNodes nodes.
double bounded_lipschitz_distance(const Density& m1, const Density& m2);

/// m_eps(x) = (2 pi)^{-d} (1 + 2 eps cos(k.x)); eps must lie in (0, 1/4).
Density m_eps_family(double eps, const WaveVector& k, const TorusGrid& grid);

/// exp(beta cos(x - center)) / Z in d = 1; in d = 2 the product over both axes.
Density von_mises(double beta, const TorusGrid& grid, double center = 0.0);

/// Density distance used for convergence monitoring: W1 in d = 1, L1 in d = 2.
double density_distance(const Density& m1, const Density& m2);

// CSV exchange: header "i,x,m" (d = 1) or "i,j,x,y,m" (d = 2), one row per node in
// flat order. Reading checks every row and reports the offending line number.

void write_density_csv(std::ostream& out, const Density& m);
void write_density_csv(const std::filesystem::path& path, const Density& m);
/// Masses within mass_tolerance of 1 are renormalized exactly; anything else is rejected.
Density read_density_csv(std::istream& in, double mass_tolerance = 1e-6);
Density read_density_csv(const std::filesystem::path& path, double mass_tolerance = 1e-6);

}  // namespace tmfg
