#include "torusmfg/torus_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

namespace tmfg {

namespace {

using Complex = std::complex<double>;

// FFTW's planner is not thread-safe, plan execution through the new-array
// interface is. Plans are created once per (d, N) under a lock and reused.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(int dim, int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({dim, n});
    if (it != plans_.end()) return it->second;

    const std::size_t real_size = dim == 1 ? n : static_cast<std::size_t>(n) * n;
    const std::size_t spec_size = dim == 1 ? n / 2 + 1 : static_cast<std::size_t>(n) * (n / 2 + 1);
    double* in = fftw_alloc_real(real_size);
    fftw_complex* out = fftw_alloc_complex(spec_size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    if (dim == 1) {
      p.forward = fftw_plan_dft_r2c_1d(n, in, out, flags);
      p.backward = fftw_plan_dft_c2r_1d(n, out, in, flags);
    } else {
      p.forward = fftw_plan_dft_r2c_2d(n, n, in, out, flags);
      p.backward = fftw_plan_dft_c2r_2d(n, n, out, in, flags);
    }
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(std::make_pair(dim, n), p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  std::mutex mutex_;
  std::map<std::pair<int, int>, PlanPair> plans_;
};

// Half-spectrum of a real grid function in FFTW r2c layout:
// d = 1: index r in [0, N/2], k = r.
// d = 2: index i * (N/2 + 1) + r, k = (wrap(i), r).
class Spectrum {
 public:
  explicit Spectrum(const ScalarField& f) : grid_(f.grid()) {
    const int n = grid_.points_per_axis();
    coeffs_.resize(grid_.dim() == 1 ? n / 2 + 1 : static_cast<std::size_t>(n) * (n / 2 + 1));
    const PlanPair p = PlanCache::instance().get(grid_.dim(), n);
    // r2c preserves its input by default; the const_cast is for FFTW's C signature.
    fftw_execute_dft_r2c(p.forward, const_cast<double*>(f.values().data()),
                         reinterpret_cast<fftw_complex*>(coeffs_.data()));
  }

  // fn(k1, k2, coeff&); k2 = 0 in d = 1.
  template <class Fn>
  void for_each(Fn&& fn) {
    const int n = grid_.points_per_axis();
    const int half = n / 2 + 1;
    if (grid_.dim() == 1) {
      for (int r = 0; r < half; ++r) fn(r, 0, coeffs_[r]);
      return;
    }
    for (int i = 0; i < n; ++i) {
      const int k1 = i <= n / 2 ? i : i - n;
      for (int r = 0; r < half; ++r) fn(k1, r, coeffs_[static_cast<std::size_t>(i) * half + r]);
    }
  }

  ScalarField to_field() {
    enforce_hermitian();
    const int n = grid_.points_per_axis();
    ScalarField out(grid_);
    const PlanPair p = PlanCache::instance().get(grid_.dim(), n);
    // c2r destroys its input; this spectrum is not reused afterwards.
    fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(coeffs_.data()),
                         out.values().data());
    out *= 1.0 / static_cast<double>(grid_.size());
    return out;
  }

 private:
  // Self-conjugate modes must carry real coefficients.
  void enforce_hermitian() {
    const int n = grid_.points_per_axis();
    const int half = n / 2 + 1;
    auto realify = [](Complex& c) { c = Complex(c.real(), 0.0); };
    if (grid_.dim() == 1) {
      realify(coeffs_[0]);
      realify(coeffs_[n / 2]);
      return;
    }
    for (int i : {0, n / 2}) {
      for (int r : {0, n / 2}) realify(coeffs_[static_cast<std::size_t>(i) * half + r]);
    }
  }

  TorusGrid grid_;
  std::vector<Complex> coeffs_;
};

void require_finite(const ScalarField& f, const char* op) {
  if (!f.all_finite()) throw InvalidArgument(std::string(op) + ": field has non-finite values");
}

}  // namespace

// ---------------------------------------------------------------------------
// TorusGrid

TorusGrid::TorusGrid(int dim, int points_per_axis) : dim_(dim), n_(points_per_axis), h_(0.0) {
  if (dim != 1 && dim != 2) throw InvalidArgument("TorusGrid: dimension must be 1 or 2");
  if (points_per_axis < 8 || points_per_axis % 2 != 0)
    throw InvalidArgument("TorusGrid: points per axis must be even and >= 8, got " +
                          std::to_string(points_per_axis));
  h_ = 2.0 * std::numbers::pi / points_per_axis;
}

double TorusGrid::volume() const noexcept {
  const double side = 2.0 * std::numbers::pi;
  return dim_ == 1 ? side : side * side;
}

Point TorusGrid::node(std::size_t flat) const noexcept {
  if (dim_ == 1) return {coordinate(static_cast<int>(flat)), 0.0};
  return {coordinate(static_cast<int>(flat / n_)), coordinate(static_cast<int>(flat % n_))};
}

std::size_t TorusGrid::index(int ix, int iy) const noexcept {
  const auto wrap = [n = n_](int i) { return ((i % n) + n) % n; };
  if (dim_ == 1) return static_cast<std::size_t>(wrap(ix));
  return static_cast<std::size_t>(wrap(ix)) * n_ + wrap(iy);
}

bool TorusGrid::resolves(const WaveVector& k) const noexcept {
  if (std::abs(k[0]) >= nyquist()) return false;
  if (dim_ == 2 && std::abs(k[1]) >= nyquist()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(const TorusGrid& grid, double value)
    : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidArgument("ScalarField: expected " + std::to_string(grid_.size()) +
                          " values, got " + std::to_string(values_.size()));
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void ScalarField::require_same_grid(const ScalarField& other) const {
  if (!(grid_ == other.grid_)) throw InvalidArgument("ScalarField: grids differ");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator+=(double c) noexcept {
  for (double& v : values_) v += c;
  return *this;
}

ScalarField& ScalarField::operator*=(double c) noexcept {
  for (double& v : values_) v *= c;
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other.values_[i];
  return *this;
}

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("VectorField: no components");
  const TorusGrid& g = components_.front().grid();
  if (static_cast<int>(components_.size()) != g.dim())
    throw InvalidArgument("VectorField: component count must equal the grid dimension");
  for (const auto& c : components_)
    if (!(c.grid() == g)) throw InvalidArgument("VectorField: components live on different grids");
}

VectorField::VectorField(const TorusGrid& grid, std::span<const double> constant) {
  if (static_cast<int>(constant.size()) != grid.dim())
    throw InvalidArgument("VectorField: constant has wrong length");
  for (double c : constant) components_.emplace_back(grid, c);
}

ScalarField VectorField::squared_norm() const {
  ScalarField out(grid());
  for (const auto& c : components_)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i] * c[i];
  return out;
}

double VectorField::sup_norm() const { return std::sqrt(squared_norm().max()); }

VectorField VectorField::scaled_by(const ScalarField& s) const {
  std::vector<ScalarField> out;
  out.reserve(components_.size());
  for (const auto& c : components_) out.push_back(c * s);
  return VectorField(std::move(out));
}

ScalarField dot(const VectorField& v, const VectorField& w) {
  if (v.dim() != w.dim()) throw InvalidArgument("dot: dimension mismatch");
  ScalarField out = v[0] * w[0];
  for (int a = 1; a < v.dim(); ++a) out += v[a] * w[a];
  return out;
}

// ---------------------------------------------------------------------------
// Spectral calculus

ScalarField partial(const ScalarField& f, int axis) {
  require_finite(f, "partial");
  if (axis < 0 || axis >= f.grid().dim()) throw InvalidArgument("partial: axis out of range");
  const int nyq = f.grid().nyquist();
  Spectrum s(f);
  s.for_each([&](int k1, int k2, Complex& c) {
    const int k = axis == 0 ? k1 : k2;
    c = std::abs(k) == nyq ? Complex(0.0, 0.0) : c * Complex(0.0, static_cast<double>(k));
  });
  return s.to_field();
}

VectorField gradient(const ScalarField& f) {
  std::vector<ScalarField> comps;
  comps.reserve(f.grid().dim());
  for (int a = 0; a < f.grid().dim(); ++a) comps.push_back(partial(f, a));
  return VectorField(std::move(comps));
}

ScalarField apply_radial_multiplier(const ScalarField& f,
                                    const std::function<double(double)>& symbol) {
  require_finite(f, "apply_radial_multiplier");
  Spectrum s(f);
  s.for_each([&](int k1, int k2, Complex& c) {
    c *= symbol(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
  });
  return s.to_field();
}

ScalarField laplacian(const ScalarField& f) {
  return apply_radial_multiplier(f, [](double k2) { return -k2; });
}

ScalarField divergence(const VectorField& v) {
  ScalarField out = partial(v[0], 0);
  for (int a = 1; a < v.dim(); ++a) out += partial(v[a], a);
  return out;
}

double integrate(const ScalarField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_volume();
}

ScalarField heat_evolve(const ScalarField& f, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("heat_evolve: time must be >= 0");
  if (t == 0.0) {
    require_finite(f, "heat_evolve");
    return f;
  }
  return apply_radial_multiplier(f, [t](double k2) { return std::exp(-k2 * t); });
}

ScalarField circular_shift(const ScalarField& f, const WaveVector& shift) {
  const TorusGrid& g = f.grid();
  ScalarField out(g);
  const int n = g.points_per_axis();
  if (g.dim() == 1) {
    for (int i = 0; i < n; ++i) out.at(i + shift[0]) = f.at(i);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.at(i + shift[0], j + shift[1]) = f.at(i, j);
  }
  return out;
}

}  // namespace tmfg
