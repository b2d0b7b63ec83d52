#pragma once

// Even cosine interaction kernels
//   psi(x) = c0 + 1/2 sum_{k != 0} c_k cos(k.x),   c_k = c_{-k},
// and everything derived from them: the cost f(x, mu) = 2 (psi * mu)(x), the
// potential F(mu) = c0 + sum_{canonical k} c_k q_k(mu), the free energy
// Phi = rho nu Ent + nu^2/2 I + F and its linear derivative, plus the
// uniqueness criteria that can be read off the coefficients.

#include <filesystem>
#include <string>
#include <vector>

#include "torusmfg/measures.hpp"

namespace tmfg {

struct KernelMode {
  WaveVector k{};
  double c = 0.0;
};

/// Representative of {k, -k}: k1 > 0, or k1 == 0 and k2 > 0.
WaveVector canonical_wave_vector(const WaveVector& k);

class FourierKernel {
 public:
  /// The zero kernel.
  FourierKernel() = default;
  /// Modes are stored under their canonical representative. Throws InvalidArgument
  /// for k = 0, duplicate pairs {k, -k}, or non-finite coefficients.
  FourierKernel(double c0, std::vector<KernelMode> modes);

  /// psi(x) = kappa sin^2(x / 2) = kappa/2 - kappa/2 cos x.
  static FourierKernel kuramoto(double kappa);

  double c0() const noexcept { return c0_; }
  const std::vector<KernelMode>& modes() const noexcept { return modes_; }
  /// Whether any mode has a nonzero second component.
  bool uses_second_axis() const noexcept;

  /// Throws InvalidArgument when a mode is not resolved on the grid
  /// (at or above Nyquist, or a 2-D mode on a 1-D grid).
  void require_resolved(const TorusGrid& grid) const;

  /// psi at a point (y ignored when the kernel is 1-D).
  double evaluate(double x, double y = 0.0) const;
  /// Upper bound on sup_x |grad f(x, mu)| valid for every probability measure:
  /// 2 sum_{canonical k} |c_k| |k|.
  double cost_gradient_bound() const;

 private:
  double c0_ = 0.0;
  std::vector<KernelMode> modes_;
};

struct ModelParams {
  double rho = 1.0;  // discount
  double nu = 1.0;   // diffusivity
  /// Throws InvalidArgument unless rho > 0 and nu > 0 (both finite).
  void validate() const;
};

/// f(x, m) = 2 c0 + 2 sum_{canonical k} c_k (a_k(m) cos(k.x) + b_k(m) sin(k.x)).
ScalarField interaction_cost(const FourierKernel& kernel, const Density& m);

/// F(m) = c0 + sum_{canonical k} c_k q_k(m).
double potential_energy(const FourierKernel& kernel, const Density& m);

struct FreeEnergy {
  double entropy = 0.0;
  double fisher = 0.0;
  double potential = 0.0;
  /// rho nu entropy + nu^2 / 2 fisher + potential.
  double total = 0.0;
};

FreeEnergy free_energy_terms(const FourierKernel& kernel, const ModelParams& params, const Density& m);
double free_energy(const FourierKernel& kernel, const ModelParams& params, const Density& m);

/// nu rho log m - nu^2 Lap log m - nu^2/2 |grad log m|^2 + f(., m). Constant exactly at
/// stationary equilibria.
ScalarField linear_derivative_free_energy(const FourierKernel& kernel, const ModelParams& params,
                                          const Density& m);

/// True iff every c_k (k != 0) is nonnegative.
bool is_lasry_lions_monotone(const FourierKernel& kernel);

/// sum_{canonical k} max(-c_k, 0). Dominates Lambda(psi); equal to it for a single pair.
double lambda_upper_bound(const FourierKernel& kernel);

/// kappa_c = 2 nu (rho + nu).
double critical_coupling(const ModelParams& params);

struct HeatFlowCriterion {
  double lhs = 0.0;  // dF(e^{t Lap} m)/dt at t = 0
  double rhs = 0.0;  // nu (rho + nu) I(m)
  bool passes = false;
};

/// Necessary condition for m to be a stationary equilibrium. passes = lhs >= rhs - tol
/// with tol = 1e-9 (1 + |rhs|); a failure certifies m is not stationary.
HeatFlowCriterion heat_flow_criterion(const FourierKernel& kernel, const ModelParams& params,
                                      const Density& m);

struct HeatFlowDerivative {
  double analytic = 0.0;  // -sum_{k != 0} c_k |k|^2 q_k(e^{t Lap} m)
  double numeric = 0.0;   // centered difference of t -> F(e^{t Lap} m), step 1e-5
};

HeatFlowDerivative heat_flow_derivative_check(const FourierKernel& kernel, const Density& m, double t);

// Kernel description: {"c0": real, "modes": [{"k": [ints], "c": real}, ...]}.

std::string kernel_to_json(const FourierKernel& kernel);
/// Throws FormatError on malformed JSON or invalid modes.
FourierKernel kernel_from_json(const std::string& text);
FourierKernel read_kernel_file(const std::filesystem::path& path);

}  // namespace tmfg
