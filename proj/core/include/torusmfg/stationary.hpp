#pragma once

// Stationary discounted MFG
//   rho u - nu Lap u + 1/2 |grad u|^2 = f(x, m),   -nu Lap m - div(m grad u) = 0,
// solved by damped Picard iteration between the HJB equation and the Gibbs
// density m = exp(-u / nu) / Z, started from several seeds.

#include <string>
#include <vector>

#include "torusmfg/coupling.hpp"

namespace tmfg {

struct StationaryConfig {
  double damping = 0.5;
  double min_damping = 1.0 / 64.0;
  double tol_fixed_point = 1e-10;  // density distance between successive iterates
  double tol_pde = 1e-9;           // sup-norm PDE residuals
  int max_outer = 5000;
  int max_hjb_inner = 500;
  int anderson_depth = 5;
  double dedup_tol = 1e-6;
  int jobs = 1;

  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

struct StationarySeed {
  std::string label;
  Density m;
};

/// uniform, m_eps(0.2, e1), von Mises beta in {1, 2, 4}, and an even two-bump mixture.
std::vector<StationarySeed> default_seed_library(const TorusGrid& grid);

struct StationaryResidual {
  double r_hjb = 0.0;    // |rho u - nu Lap u + 1/2 |grad u|^2 - f(., m)|_inf
  double r_fp = 0.0;     // |nu Lap m + div(m grad u)|_inf
  double r_const = 0.0;  // oscillation of the free-energy derivative at m
};

StationaryResidual stationarity_residual(const ScalarField& u, const Density& m, const FourierKernel& kernel,
                                         const ModelParams& params);

struct StationarySolution {
  std::string seed;
  ScalarField u;
  Density m;
  double residual_hjb = 0.0;
  double residual_fp = 0.0;
  double residual_const = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;  // reason for non-convergence, empty otherwise
};

struct StationaryIteration {
  int iter = 0;
  double step = 0.0;  // density distance to the previous iterate
  double damping = 0.0;
  double r_hjb = 0.0;
  double r_fp = 0.0;
  double r_const = 0.0;
};

struct SeedRun {
  StationarySolution solution;
  std::vector<StationaryIteration> history;
};

struct StationaryRun {
  std::vector<SeedRun> seeds;                 // in seed order
  std::vector<StationarySolution> solutions;  // converged, deduplicated modulo translation

  bool all_converged() const;
};

/// Fixed point u = (rho - nu Lap)^{-1} (f - 1/2 |grad u|^2) with Anderson mixing. Stops once the
/// sup-norm HJB residual is <= tol; throws ConvergenceError after max_iter iterations.
ScalarField solve_stationary_hjb(const ScalarField& f, const ModelParams& params, const ScalarField& u_init,
                                 int max_iter, double tol, int anderson_depth = 5);

/// exp(-u / nu) / Z, computed after shifting u by its minimum.
Density gibbs_density(const ScalarField& u, double nu);

/// Distance modulo translations: min over grid shifts of density_distance.
double shift_invariant_distance(const Density& a, const Density& b);

/// Runs every seed (concurrently when config.jobs > 1); per-seed failures are recorded, not thrown.
StationaryRun solve_stationary_mfg(const FourierKernel& kernel, const ModelParams& params,
                                   const StationaryConfig& config, const std::vector<StationarySeed>& seeds);

/// Keeps the first of every group of solutions closer than tol modulo translation.
std::vector<StationarySolution> deduplicate(const std::vector<StationarySolution>& solutions, double tol);

}  // namespace tmfg
