#include "torusmfg/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace tmfg {

namespace {

double norm2(const WaveVector& k) { return static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1]; }

struct Moment {
  double a;
  double b;
};

// Trapezoid moments of an arbitrary grid function (heat-evolved fields need not be densities).
Moment moment_of(const ScalarField& f, const WaveVector& k) {
  const TorusGrid& g = f.grid();
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.node(i);
    const double th = k[0] * p.x + k[1] * p.y;
    a += std::cos(th) * f[i];
    b += std::sin(th) * f[i];
  }
  return {a * g.cell_volume(), b * g.cell_volume()};
}

double potential_of(const FourierKernel& kernel, const ScalarField& f) {
  double value = kernel.c0();
  for (const KernelMode& mode : kernel.modes()) {
    const Moment mo = moment_of(f, mode.k);
    value += mode.c * (mo.a * mo.a + mo.b * mo.b);
  }
  return value;
}

}  // namespace

WaveVector canonical_wave_vector(const WaveVector& k) {
  if (k[0] > 0 || (k[0] == 0 && k[1] > 0)) return k;
  return {-k[0], -k[1]};
}

FourierKernel::FourierKernel(double c0, std::vector<KernelMode> modes) : c0_(c0), modes_(std::move(modes)) {
  if (!std::isfinite(c0_)) throw InvalidArgument("FourierKernel: c0 must be finite");
  std::set<WaveVector> seen;
  for (KernelMode& mode : modes_) {
    if (mode.k[0] == 0 && mode.k[1] == 0) throw InvalidArgument("FourierKernel: mode k = 0 (use c0)");
    if (!std::isfinite(mode.c)) throw InvalidArgument("FourierKernel: non-finite coefficient");
    mode.k = canonical_wave_vector(mode.k);
    if (!seen.insert(mode.k).second)
      throw InvalidArgument("FourierKernel: duplicate mode (" + std::to_string(mode.k[0]) + ", " +
                            std::to_string(mode.k[1]) + ") given twice up to sign");
  }
  std::sort(modes_.begin(), modes_.end(),
            [](const KernelMode& a, const KernelMode& b) { return a.k < b.k; });
}

FourierKernel FourierKernel::kuramoto(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("kuramoto: kappa must be positive");
  return FourierKernel(kappa / 2.0, {{{1, 0}, -kappa / 2.0}});
}

bool FourierKernel::uses_second_axis() const noexcept {
  return std::any_of(modes_.begin(), modes_.end(), [](const KernelMode& m) { return m.k[1] != 0; });
}

void FourierKernel::require_resolved(const TorusGrid& grid) const {
  for (const KernelMode& mode : modes_) {
    if (grid.dim() == 1 && mode.k[1] != 0)
      throw InvalidArgument("kernel mode with k2 != 0 cannot act on a 1-D grid");
    if (!grid.resolves(mode.k))
      throw InvalidArgument("kernel mode (" + std::to_string(mode.k[0]) + ", " + std::to_string(mode.k[1]) +
                            ") is not below the Nyquist mode " + std::to_string(grid.nyquist()));
  }
}

double FourierKernel::evaluate(double x, double y) const {
  double value = c0_;
  for (const KernelMode& mode : modes_) value += mode.c * std::cos(mode.k[0] * x + mode.k[1] * y);
  return value;
}

double FourierKernel::cost_gradient_bound() const {
  double bound = 0.0;
  for (const KernelMode& mode : modes_) bound += 2.0 * std::abs(mode.c) * std::sqrt(norm2(mode.k));
  return bound;
}

void ModelParams::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be positive and finite");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidArgument("nu must be positive and finite");
}

ScalarField interaction_cost(const FourierKernel& kernel, const Density& m) {
  const TorusGrid& g = m.grid();
  kernel.require_resolved(g);
  ScalarField f(g, 2.0 * kernel.c0());
  for (const KernelMode& mode : kernel.modes()) {
    const Moment mo = moment_of(m.field(), mode.k);
    const double ca = 2.0 * mode.c * mo.a;
    const double cb = 2.0 * mode.c * mo.b;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point p = g.node(i);
      const double th = mode.k[0] * p.x + mode.k[1] * p.y;
      f[i] += ca * std::cos(th) + cb * std::sin(th);
    }
  }
  return f;
}

double potential_energy(const FourierKernel& kernel, const Density& m) {
  kernel.require_resolved(m.grid());
  return potential_of(kernel, m.field());
}

FreeEnergy free_energy_terms(const FourierKernel& kernel, const ModelParams& params, const Density& m) {
  params.validate();
  FreeEnergy e;
  e.entropy = entropy(m);
  e.fisher = fisher_information(m);
  e.potential = potential_energy(kernel, m);
  e.total = params.rho * params.nu * e.entropy + 0.5 * params.nu * params.nu * e.fisher + e.potential;
  return e;
}

double free_energy(const FourierKernel& kernel, const ModelParams& params, const Density& m) {
  return free_energy_terms(kernel, params, m).total;
}

ScalarField linear_derivative_free_energy(const FourierKernel& kernel, const ModelParams& params,
                                          const Density& m) {
  params.validate();
  const double nu = params.nu;
  const ScalarField log_m = log_density(m);
  ScalarField out = log_m * (nu * params.rho);
  out -= laplacian(log_m) * (nu * nu);
  out -= gradient(log_m).squared_norm() * (0.5 * nu * nu);
  out += interaction_cost(kernel, m);
  return out;
}

bool is_lasry_lions_monotone(const FourierKernel& kernel) {
  return std::all_of(kernel.modes().begin(), kernel.modes().end(),
                     [](const KernelMode& m) { return m.c >= 0.0; });
}

double lambda_upper_bound(const FourierKernel& kernel) {
  double sum = 0.0;
  for (const KernelMode& mode : kernel.modes()) sum += std::max(-mode.c, 0.0);
  return sum;
}

double critical_coupling(const ModelParams& params) {
  params.validate();
  return 2.0 * params.nu * (params.rho + params.nu);
}

HeatFlowCriterion heat_flow_criterion(const FourierKernel& kernel, const ModelParams& params,
                                      const Density& m) {
  params.validate();
  kernel.require_resolved(m.grid());
  HeatFlowCriterion r;
  // Both k and -k contribute, hence the factor 2 over canonical modes.
  for (const KernelMode& mode : kernel.modes()) {
    const FourierMoment mo = fourier_moment(m, mode.k);
    r.lhs -= 2.0 * mode.c * norm2(mode.k) * mo.q;
  }
  r.rhs = params.nu * (params.rho + params.nu) * fisher_information(m);
  r.passes = r.lhs >= r.rhs - 1e-9 * (1.0 + std::abs(r.rhs));
  return r;
}

HeatFlowDerivative heat_flow_derivative_check(const FourierKernel& kernel, const Density& m, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("heat_flow_derivative_check: t must be >= 0");
  kernel.require_resolved(m.grid());
  // The semigroup is evaluated through its multiplier so the centered stencil may reach t < 0.
  const auto flowed = [&](double s) {
    return apply_radial_multiplier(m.field(), [s](double k2) { return std::exp(-k2 * s); });
  };
  HeatFlowDerivative r;
  const ScalarField eta = flowed(t);
  for (const KernelMode& mode : kernel.modes()) {
    const Moment mo = moment_of(eta, mode.k);
    r.analytic -= 2.0 * mode.c * norm2(mode.k) * (mo.a * mo.a + mo.b * mo.b);
  }
  constexpr double step = 1e-5;
  r.numeric = (potential_of(kernel, flowed(t + step)) - potential_of(kernel, flowed(t - step))) / (2.0 * step);
  return r;
}

}  // namespace tmfg
