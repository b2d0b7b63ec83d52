#pragma once

// Self-contained numerical checks of the inequalities and closed forms the
// measure functionals rest on: the one-dimensional log inequality
// int |(log g)'|^2 g <= int |(log g)''|^2 g, the Fisher mode bound
// I(m) >= 2 |k|^2 q_k(m) and its sharpness along m_eps, the heat-flow identities
// dEnt/dt = -I and dI/dt <= -2I, and the heat-flow derivative of F.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "torusmfg/coupling.hpp"

namespace tmfg {

/// a_0 + sum_{j=1}^{K} (a_j cos(j x) + b_j sin(j x)) on the circle.
struct TrigPolynomial {
  std::vector<double> cos_coeffs;  // a_0 .. a_K
  std::vector<double> sin_coeffs;  // b_0 (unused, 0) .. b_K

  int degree() const noexcept { return static_cast<int>(cos_coeffs.size()) - 1; }
  double operator()(double x) const;
  ScalarField sample(const TorusGrid& grid) const;
  /// Minimum nodal value on the grid.
  double margin(const TorusGrid& grid) const;
};

/// Degree uniform in [1, max_degree], a_j, b_j uniform in [-2^{-j}, 2^{-j}]; a_0 is then set to
/// 1.05 times the magnitude of the most negative value of the oscillating part (sampled on `grid`)
/// plus min_margin, so the nodal minimum is at least min_margin.
TrigPolynomial random_positive_trig_polynomial(std::mt19937_64& rng, int max_degree, double min_margin,
                                               const TorusGrid& grid);

/// Random strictly positive band-limited density (d = 1): a normalized random trig polynomial.
Density random_positive_density(std::mt19937_64& rng, int max_degree, const TorusGrid& grid);

/// Random kernel with 1..max_modes distinct modes k in [1, max_k] and coefficients in [-2, 2].
FourierKernel random_kernel(std::mt19937_64& rng, int max_modes, int max_k);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool passes = false;
};

/// int |(log g)'|^2 g <= int |(log g)''|^2 g + 1e-9 (1 + rhs); g must be strictly positive, d = 1.
InequalityCheck torus_log_inequality_check(const ScalarField& g);

struct ModeBoundCheck {
  double ratio = 0.0;  // 2 |k|^2 q_k / I
  bool passes = false;  // ratio <= 1 + 1e-8
};

/// Throws InvalidArgument for (numerically) uniform m.
ModeBoundCheck fisher_mode_bound_check(const Density& m, const WaveVector& k);

/// 2 eps^2 / (1 - sqrt(1 - 4 eps^2)).
double sharpness_ratio_closed_form(double eps);

struct SharpnessRow {
  double eps = 0.0;
  double ratio = 0.0;        // computed on the grid
  double closed_form = 0.0;  // sharpness_ratio_closed_form(eps)
};

std::vector<SharpnessRow> sharpness_sweep(const WaveVector& k, const std::vector<double>& eps_list,
                                          const TorusGrid& grid);

struct HeatIdentityCheck {
  double dent_dt = 0.0;  // centered difference of Ent(e^{t Lap} m)
  double fisher = 0.0;   // I(e^{t Lap} m)
  double dfisher_dt = 0.0;
  bool de_bruijn_passes = false;    // |dent_dt + fisher| <= 1e-6 fisher
  bool fisher_decay_passes = false;  // dfisher_dt <= -2 fisher + 1e-8
};

/// Centered differences with step tau around time t (the multiplier form of the semigroup allows t < tau).
HeatIdentityCheck heat_identity_check(const Density& m, double t, double tau = 1e-5);

// Verification suite ------------------------------------------------------------

struct VerificationOptions {
  std::uint64_t seed = 42;
  int points_per_axis = 128;
  int log_inequality_samples = 200;
  int mode_bound_samples = 100;
  int heat_identity_samples = 10;
  int heat_derivative_samples = 20;
  std::filesystem::path artifact_dir;  // failing samples are written here when non-empty
};

struct VerificationCase {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerificationReport {
  std::vector<VerificationCase> cases;
  bool all_passed() const;
};

VerificationReport run_verification_suite(const VerificationOptions& options);

void write_junit_xml(const std::filesystem::path& path, const VerificationReport& report);
std::string text_summary(const VerificationReport& report);

}  // namespace tmfg
