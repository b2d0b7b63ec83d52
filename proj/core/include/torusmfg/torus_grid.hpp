#pragma once

// Uniform periodic grids on the torus (R / 2*pi*Z)^d, d in {1, 2}, and the
// trigonometric-spectral calculus used by every solver in the library.
//
// Grid functions are stored row-major with the x-axis index outermost:
// value(ix, iy) = values[ix * N + iy]. All derivatives are exact for
// trigonometric polynomials whose modes lie strictly below the Nyquist mode
// N/2; the Nyquist coefficient of an odd derivative is set to zero.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <type_traits>
#include <vector>

#include "torusmfg/error.hpp"

namespace tmfg {

/// Integer wave vector; the second component is ignored (and kept 0) in d = 1.
using WaveVector = std::array<int, 2>;

/// Node coordinates; y = 0 in d = 1.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

class TorusGrid {
 public:
  /// Throws InvalidArgument unless dim is 1 or 2 and N is even and >= 8.
  TorusGrid(int dim, int points_per_axis);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  int nyquist() const noexcept { return n_ / 2; }
  double spacing() const noexcept { return h_; }
  /// Quadrature weight h^d carried by every node.
  double cell_volume() const noexcept { return dim_ == 1 ? h_ : h_ * h_; }
  /// Total node count N^d.
  std::size_t size() const noexcept {
    return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
  }
  /// Volume of the torus, (2*pi)^d.
  double volume() const noexcept;

  double coordinate(int j) const noexcept { return j * h_; }
  Point node(std::size_t flat) const noexcept;
  /// Flat index of (ix, iy), both taken modulo N.
  std::size_t index(int ix, int iy = 0) const noexcept;

  /// Whether every component of k is strictly below the Nyquist mode.
  bool resolves(const WaveVector& k) const noexcept;

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) noexcept {
    return a.dim_ == b.dim_ && a.n_ == b.n_;
  }

 private:
  int dim_;
  int n_;
  double h_;
};

class ScalarField {
 public:
  explicit ScalarField(const TorusGrid& grid, double value = 0.0);
  /// Throws InvalidArgument when values.size() != grid.size().
  ScalarField(const TorusGrid& grid, std::vector<double> values);

  /// Evaluate f at every node. f is called as f(x) on 1-D grids and f(x, y) on 2-D grids
  /// (a callable taking a single double is rejected on a 2-D grid).
  template <class F>
  static ScalarField sample(const TorusGrid& grid, F&& f);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& at(int ix, int iy = 0) { return values_[grid_.index(ix, iy)]; }
  double at(int ix, int iy = 0) const { return values_[grid_.index(ix, iy)]; }

  double min() const;
  double max() const;
  double sup_norm() const;
  /// max - min.
  double oscillation() const { return max() - min(); }
  bool all_finite() const noexcept;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator+=(double c) noexcept;
  ScalarField& operator-=(double c) noexcept { return *this += -c; }
  ScalarField& operator*=(double c) noexcept;
  /// Pointwise product.
  ScalarField& operator*=(const ScalarField& other);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator+(ScalarField a, double c) { return a += c; }
  friend ScalarField operator-(ScalarField a, double c) { return a -= c; }
  friend ScalarField operator*(ScalarField a, double c) { return a *= c; }
  friend ScalarField operator*(double c, ScalarField a) { return a *= c; }
  friend ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }

  /// Apply fn to every value.
  template <class F>
  ScalarField map(F&& fn) const {
    ScalarField out(*this);
    for (double& v : out.values_) v = fn(v);
    return out;
  }

 private:
  void require_same_grid(const ScalarField& other) const;

  TorusGrid grid_;
  std::vector<double> values_;
};

class VectorField {
 public:
  /// Throws InvalidArgument unless there are exactly grid.dim() components on one grid.
  explicit VectorField(std::vector<ScalarField> components);
  /// Constant vector field.
  VectorField(const TorusGrid& grid, std::span<const double> constant);

  const TorusGrid& grid() const noexcept { return components_.front().grid(); }
  int dim() const noexcept { return static_cast<int>(components_.size()); }
  const ScalarField& operator[](int axis) const { return components_.at(axis); }
  ScalarField& operator[](int axis) { return components_.at(axis); }

  /// Pointwise |v|^2.
  ScalarField squared_norm() const;
  /// max over nodes of |v|.
  double sup_norm() const;
  /// Pointwise product with a scalar field.
  VectorField scaled_by(const ScalarField& s) const;

 private:
  std::vector<ScalarField> components_;
};

/// Pointwise v . w.
ScalarField dot(const VectorField& v, const VectorField& w);

// Spectral calculus. Every operation throws InvalidArgument on non-finite input.

/// Spectral derivative along one axis.
ScalarField partial(const ScalarField& f, int axis);
VectorField gradient(const ScalarField& f);
ScalarField laplacian(const ScalarField& f);
ScalarField divergence(const VectorField& v);
/// h^d * sum of nodal values (periodic trapezoid rule).
double integrate(const ScalarField& f);
/// Exact heat semigroup e^{t Delta}; throws InvalidArgument for t < 0.
ScalarField heat_evolve(const ScalarField& f, double t);
/// Fourier multiplier depending only on |k|^2: c_k -> symbol(|k|^2) c_k.
ScalarField apply_radial_multiplier(const ScalarField& f,
                                    const std::function<double(double)>& symbol);
/// g(x) = f(x - shift * h), i.e. values move by `shift` nodes along each axis.
ScalarField circular_shift(const ScalarField& f, const WaveVector& shift);

template <class F>
ScalarField ScalarField::sample(const TorusGrid& grid, F&& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.node(i);
    if constexpr (std::is_invocable_r_v<double, F, double, double>) {
      out.values_[i] = f(p.x, p.y);
    } else {
      static_assert(std::is_invocable_r_v<double, F, double>,
                    "sample() needs a callable f(x) or f(x, y)");
      if (grid.dim() != 1) throw InvalidArgument("sample: f(x) used on a 2-D grid");
      out.values_[i] = f(p.x);
    }
  }
  return out;
}

}  // namespace tmfg
