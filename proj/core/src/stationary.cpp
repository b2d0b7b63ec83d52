#include "torusmfg/stationary.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "torusmfg/parallel.hpp"

namespace tmfg {

namespace {

ScalarField resolvent(const ScalarField& g, const ModelParams& p) {
  return apply_radial_multiplier(g, [&p](double k2) { return 1.0 / (p.rho + p.nu * k2); });
}

// (rho - nu Lap) v
ScalarField hjb_operator(const ScalarField& v, const ModelParams& p) {
  return apply_radial_multiplier(v, [&p](double k2) { return p.rho + p.nu * k2; });
}

Eigen::Map<const Eigen::VectorXd> as_vector(const ScalarField& f) {
  return {f.data().data(), static_cast<Eigen::Index>(f.size())};
}

Density mixture(const Density& a, const Density& b, double weight_b) {
  ScalarField f = a.field() * (1.0 - weight_b);
  f += b.field() * weight_b;
  return Density::normalized(std::move(f));
}

SeedRun empty_run(const std::string& label, const Density& m) {
  SeedRun run{StationarySolution{label, ScalarField(m.grid()), m, 0.0, 0.0, 0.0, 0, false, ""}, {}};
  return run;
}

SeedRun run_seed(const FourierKernel& kernel, const ModelParams& params, const StationaryConfig& cfg,
                 const StationarySeed& seed) {
  SeedRun run = empty_run(seed.label, seed.m);
  StationarySolution& sol = run.solution;
  Density m = seed.m;
  ScalarField u(m.grid());
  double damping = cfg.damping;
  double step = std::numeric_limits<double>::infinity();
  double prev_step = step;
  int rises = 0;
  try {
    for (int it = 1; it <= cfg.max_outer; ++it) {
      u = solve_stationary_hjb(interaction_cost(kernel, m), params, u, cfg.max_hjb_inner, 0.1 * cfg.tol_pde,
                               cfg.anderson_depth);
      const Density gibbs = gibbs_density(u, params.nu);
      const StationaryResidual res = stationarity_residual(u, gibbs, kernel, params);
      run.history.push_back({it, step, damping, res.r_hjb, res.r_fp, res.r_const});
      sol.iterations = it;
      if (step <= cfg.tol_fixed_point && res.r_hjb <= cfg.tol_pde && res.r_fp <= cfg.tol_pde) {
        sol.u = u;
        sol.m = gibbs;
        sol.residual_hjb = res.r_hjb;
        sol.residual_fp = res.r_fp;
        sol.residual_const = res.r_const;
        sol.converged = true;
        return run;
      }
      Density next = mixture(m, gibbs, damping);
      prev_step = step;
      step = density_distance(next, m);
      m = std::move(next);
      rises = step > prev_step ? rises + 1 : 0;
      if (rises >= 3 && damping > cfg.min_damping) {
        damping = std::max(cfg.min_damping, 0.5 * damping);
        rises = 0;
      }
    }
    sol.message = "no convergence after " + std::to_string(cfg.max_outer) + " outer iterations (last step " +
                  std::to_string(step) + ")";
  } catch (const ConvergenceError& e) {
    sol.message = e.what();
  } catch (const DegenerateDensity& e) {
    sol.message = e.what();
  }
  sol.u = u;
  sol.m = m;
  if (!run.history.empty()) {
    sol.residual_hjb = run.history.back().r_hjb;
    sol.residual_fp = run.history.back().r_fp;
    sol.residual_const = run.history.back().r_const;
  }
  return run;
}

}  // namespace

void StationaryConfig::validate() const {
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidArgument("stationary damping must lie in (0, 1]");
  if (!(min_damping > 0.0 && min_damping <= damping))
    throw InvalidArgument("stationary min_damping must lie in (0, damping]");
  if (!(tol_fixed_point > 0.0) || !(tol_pde > 0.0)) throw InvalidArgument("stationary tolerances must be positive");
  if (max_outer < 1 || max_hjb_inner < 1) throw InvalidArgument("stationary iteration limits must be >= 1");
  if (anderson_depth < 0) throw InvalidArgument("anderson_depth must be >= 0");
  if (!(dedup_tol > 0.0)) throw InvalidArgument("dedup_tol must be positive");
}

std::vector<StationarySeed> default_seed_library(const TorusGrid& grid) {
  std::vector<StationarySeed> seeds;
  seeds.push_back({"uniform", Density::uniform(grid)});
  seeds.push_back({"m_eps(0.2)", m_eps_family(0.2, {1, 0}, grid)});
  for (double beta : {1.0, 2.0, 4.0})
    seeds.push_back({"von_mises(" + std::to_string(static_cast<int>(beta)) + ")", von_mises(beta, grid)});
  seeds.push_back({"two_bump", mixture(von_mises(4.0, grid), von_mises(4.0, grid, std::numbers::pi), 0.5)});
  return seeds;
}

StationaryResidual stationarity_residual(const ScalarField& u, const Density& m, const FourierKernel& kernel,
                                         const ModelParams& params) {
  params.validate();
  if (!(u.grid() == m.grid())) throw InvalidArgument("stationarity_residual: u and m live on different grids");
  StationaryResidual r;
  const VectorField grad_u = gradient(u);
  ScalarField hjb = hjb_operator(u, params);
  hjb += grad_u.squared_norm() * 0.5;
  hjb -= interaction_cost(kernel, m);
  r.r_hjb = hjb.sup_norm();
  ScalarField fp = laplacian(m.field()) * params.nu;
  fp += divergence(grad_u.scaled_by(m.field()));
  r.r_fp = fp.sup_norm();
  r.r_const = linear_derivative_free_energy(kernel, params, m).oscillation();
  return r;
}

ScalarField solve_stationary_hjb(const ScalarField& f, const ModelParams& params, const ScalarField& u_init,
                                 int max_iter, double tol, int anderson_depth) {
  params.validate();
  if (!(f.grid() == u_init.grid())) throw InvalidArgument("solve_stationary_hjb: f and u_init grids differ");
  if (max_iter < 1 || !(tol > 0.0)) throw InvalidArgument("solve_stationary_hjb: bad iteration limits");
  // Pseudo-time shift sigma: u <- (rho + sigma - nu Lap)^{-1} (sigma u + f - 1/2 |grad u|^2). It starts at 0 and
  // grows whenever the iteration diverges, restarting from the best iterate.
  double sigma = 0.0;
  ModelParams shifted = params;
  const auto map = [&](const ScalarField& u) {
    ScalarField rhs = f;
    rhs -= gradient(u).squared_norm() * 0.5;
    if (sigma > 0.0) rhs += u * sigma;
    return resolvent(rhs, shifted);
  };

  // Anderson mixing on the fixed-point residual g = G(u) - u.
  std::deque<ScalarField> images;     // G(u_j)
  std::deque<ScalarField> residuals;  // G(u_j) - u_j
  ScalarField u = u_init;
  ScalarField best_u = u_init;
  double best = std::numeric_limits<double>::infinity();
  double r = best;
  for (int it = 0; it < max_iter; ++it) {
    bool diverged = !u.all_finite();
    ScalarField image = diverged ? u : map(u);
    ScalarField g = image - u;
    // rho u - nu Lap u + 1/2 |grad u|^2 - f equals (rho + sigma - nu Lap)(u - G(u)).
    if (!diverged) {
      r = hjb_operator(g, shifted).sup_norm();
      if (r <= tol) return u;
      diverged = !std::isfinite(r) || r > 1e3 * (1.0 + best);
    }
    if (diverged) {
      sigma = sigma == 0.0 ? 1.0 : 4.0 * sigma;
      shifted.rho = params.rho + sigma;
      images.clear();
      residuals.clear();
      u = best_u;
      continue;
    }
    if (r > 2.0 * best) {
      images.clear();
      residuals.clear();
    }
    if (r < best) {
      best = r;
      best_u = u;
    }
    images.push_back(image);
    residuals.push_back(g);
    if (static_cast<int>(images.size()) > anderson_depth + 1) {
      images.pop_front();
      residuals.pop_front();
    }
    const auto cols = static_cast<Eigen::Index>(images.size()) - 1;
    if (cols == 0) {
      u = std::move(image);
      continue;
    }
    Eigen::MatrixXd dg(static_cast<Eigen::Index>(u.size()), cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      dg.col(c) = as_vector(residuals[c + 1]) - as_vector(residuals[c]);
    const Eigen::VectorXd gamma = dg.colPivHouseholderQr().solve(as_vector(g));
    ScalarField next = image;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double w = gamma[c];
      for (std::size_t i = 0; i < next.size(); ++i) next[i] -= w * (images[c + 1][i] - images[c][i]);
    }
    u = std::move(next);
  }
  throw ConvergenceError("stationary HJB did not reach residual " + std::to_string(tol) + " after " +
                             std::to_string(max_iter) + " iterations (last residual " + std::to_string(r) + ")",
                         r, max_iter);
}

Density gibbs_density(const ScalarField& u, double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("gibbs_density: nu must be positive");
  if (!u.all_finite()) throw InvalidArgument("gibbs_density: non-finite u");
  const double shift = u.min();
  return Density::normalized(u.map([shift, nu](double v) { return std::exp(-(v - shift) / nu); }));
}

double shift_invariant_distance(const Density& a, const Density& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("shift_invariant_distance: different grids");
  const TorusGrid& g = a.grid();
  const int n = g.points_per_axis();
  double best = std::numeric_limits<double>::infinity();
  for (int s1 = 0; s1 < n; ++s1) {
    for (int s2 = 0; s2 < (g.dim() == 2 ? n : 1); ++s2) {
      const Density shifted = Density::normalized(circular_shift(a.field(), {s1, s2}));
      best = std::min(best, density_distance(shifted, b));
    }
  }
  return best;
}

std::vector<StationarySolution> deduplicate(const std::vector<StationarySolution>& solutions, double tol) {
  std::vector<StationarySolution> kept;
  for (const StationarySolution& s : solutions) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const StationarySolution& k) {
      return shift_invariant_distance(s.m, k.m) < tol;
    });
    if (!duplicate) kept.push_back(s);
  }
  return kept;
}

bool StationaryRun::all_converged() const {
  return std::all_of(seeds.begin(), seeds.end(), [](const SeedRun& s) { return s.solution.converged; });
}

StationaryRun solve_stationary_mfg(const FourierKernel& kernel, const ModelParams& params,
                                   const StationaryConfig& config, const std::vector<StationarySeed>& seeds) {
  params.validate();
  config.validate();
  if (seeds.empty()) throw InvalidArgument("solve_stationary_mfg: no seeds");
  const TorusGrid& grid = seeds.front().m.grid();
  for (const StationarySeed& s : seeds)
    if (!(s.m.grid() == grid)) throw InvalidArgument("solve_stationary_mfg: seeds live on different grids");
  kernel.require_resolved(grid);

  StationaryRun run;
  run.seeds.resize(seeds.size(), empty_run("", Density::uniform(grid)));
  parallel_for(seeds.size(), config.jobs,
               [&](std::size_t i) { run.seeds[i] = run_seed(kernel, params, config, seeds[i]); });
  std::vector<StationarySolution> converged;
  for (const SeedRun& s : run.seeds)
    if (s.solution.converged) converged.push_back(s.solution);
  run.solutions = deduplicate(converged, config.dedup_tol);
  return run;
}

}  // namespace tmfg
