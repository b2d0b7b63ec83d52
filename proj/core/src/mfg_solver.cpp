#include "torusmfg/mfg_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tmfg {

TimeMesh::TimeMesh(double horizon_, int steps_) : horizon(horizon_), steps(steps_) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("TimeMesh: horizon must be positive");
  if (steps < 1) throw InvalidArgument("TimeMesh: steps must be >= 1");
}

double max_time_step(const FourierKernel& kernel, const ModelParams& params, const TorusGrid& grid) {
  params.validate();
  const double gradient_bound = kernel.cost_gradient_bound() / params.rho;
  return std::min(0.5 / params.rho, 0.25 * grid.spacing() / (1.0 + gradient_bound));
}

void require_stable_mesh(const TimeMesh& mesh, const FourierKernel& kernel, const ModelParams& params,
                         const TorusGrid& grid) {
  const double cap = max_time_step(kernel, params, grid);
  if (mesh.dt() > cap)
    throw InvalidArgument("time step " + std::to_string(mesh.dt()) + " exceeds the stability cap " +
                          std::to_string(cap) + "; increase the number of steps to at least " +
                          std::to_string(static_cast<long long>(std::ceil(mesh.horizon / cap))));
}

std::vector<ScalarField> solve_hjb_backward(const std::vector<Density>& flow, const FourierKernel& kernel,
                                            const ModelParams& params, const ScalarField& u_terminal,
                                            const TimeMesh& mesh) {
  params.validate();
  if (static_cast<int>(flow.size()) != mesh.points())
    throw InvalidArgument("solve_hjb_backward: flow has " + std::to_string(flow.size()) + " densities, mesh has " +
                          std::to_string(mesh.points()) + " points");
  const TorusGrid& grid = u_terminal.grid();
  kernel.require_resolved(grid);
  if (!u_terminal.all_finite()) throw InvalidArgument("solve_hjb_backward: non-finite terminal value");
  const double dt = mesh.dt();
  const auto implicit = [&](double k2) { return 1.0 / (1.0 + dt * (params.rho + params.nu * k2)); };

  std::vector<ScalarField> values(mesh.points(), ScalarField(grid));
  values.back() = u_terminal;
  for (int i = mesh.steps - 1; i >= 0; --i) {
    if (!(flow[i].grid() == grid)) throw InvalidArgument("solve_hjb_backward: density grid mismatch");
    const ScalarField& next = values[i + 1];
    ScalarField rhs = interaction_cost(kernel, flow[i]);
    rhs -= gradient(next).squared_norm() * 0.5;
    rhs *= dt;
    rhs += next;
    values[i] = apply_radial_multiplier(rhs, implicit);
    const double norm = values[i].sup_norm();
    if (!(norm <= kBlowUpThreshold))
      throw BlowUpError("HJB blow-up at time step " + std::to_string(i) + " (t = " + std::to_string(mesh.time(i)) +
                            ", |u| = " + std::to_string(norm) + ")",
                        i);
  }
  return values;
}

std::vector<Density> solve_fp_forward(const std::vector<ScalarField>& values, const Density& m0,
                                      const ModelParams& params, const TimeMesh& mesh, double* max_clipped_mass) {
  params.validate();
  if (static_cast<int>(values.size()) != mesh.points())
    throw InvalidArgument("solve_fp_forward: values have " + std::to_string(values.size()) + " entries, mesh has " +
                          std::to_string(mesh.points()) + " points");
  const TorusGrid& grid = m0.grid();
  const double dt = mesh.dt();
  const auto implicit = [&](double k2) { return 1.0 / (1.0 + dt * params.nu * k2); };

  std::vector<Density> densities;
  densities.reserve(values.size());
  densities.push_back(m0);
  double worst = 0.0;
  for (int i = 0; i < mesh.steps; ++i) {
    const ScalarField& u = values[i + 1];
    if (!(u.grid() == grid)) throw InvalidArgument("solve_fp_forward: value grid mismatch");
    const ScalarField& m = densities.back().field();
    ScalarField rhs = divergence(gradient(u).scaled_by(m));
    rhs *= dt;
    rhs += m;
    ScalarField next = apply_radial_multiplier(rhs, implicit);

    double clipped = 0.0;
    for (double& v : next.values()) {
      if (v < kPositivityFloor) {
        clipped += kPositivityFloor - v;
        v = kPositivityFloor;
      }
    }
    clipped *= grid.cell_volume();
    if (clipped > kMaxClippedMass)
      throw BlowUpError("Fokker-Planck step " + std::to_string(i) + " clipped mass " + std::to_string(clipped) +
                            "; refine the grid or the time step",
                        i);
    worst = std::max(worst, clipped);
    if (!next.all_finite()) throw BlowUpError("Fokker-Planck step " + std::to_string(i) + " produced NaN", i);
    densities.push_back(clipped > 0.0 ? Density::normalized(std::move(next)) : Density(std::move(next)));
  }
  if (max_clipped_mass) *max_clipped_mass = worst;
  return densities;
}

TerminalMode parse_terminal_mode(const std::string& name) {
  if (name == "stationary") return TerminalMode::stationary;
  if (name == "zero") return TerminalMode::zero;
  throw InvalidArgument("terminal_mode must be \"stationary\" or \"zero\", got \"" + name + "\"");
}

std::string to_string(TerminalMode mode) { return mode == TerminalMode::stationary ? "stationary" : "zero"; }

void PicardOptions::validate() const {
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidArgument("Picard damping must lie in (0, 1]");
  if (!(tol > 0.0)) throw InvalidArgument("Picard tolerance must be positive");
  if (max_iter < 1) throw InvalidArgument("Picard max_iter must be >= 1");
  if (terminal == TerminalMode::stationary) stationary.validate();
}

Density smoothed_initial_density(const Density& m0) {
  ScalarField f = heat_evolve(m0.field(), kInitialSmoothing);
  if (f.min() < kPositivityFloor) return Density::clamped(std::move(f));
  return Density::normalized(std::move(f));
}

namespace {

ScalarField terminal_value(const FourierKernel& kernel, const ModelParams& params, const PicardOptions& options,
                           const Density& m_terminal) {
  if (options.terminal == TerminalMode::zero) return ScalarField(m_terminal.grid());
  StationaryConfig cfg = options.stationary;
  cfg.jobs = 1;
  const StationaryRun run = solve_stationary_mfg(kernel, params, cfg, {{"terminal", m_terminal}});
  const StationarySolution& sol = run.seeds.front().solution;
  if (!sol.converged)
    throw ConvergenceError("stationary terminal value did not converge: " + sol.message, sol.residual_hjb,
                           sol.iterations);
  return sol.u;
}

}  // namespace

FlowTrajectory solve_mfg(const FourierKernel& kernel, const ModelParams& params, const Density& m0,
                         const TimeMesh& mesh, const PicardOptions& options) {
  params.validate();
  options.validate();
  const TorusGrid& grid = m0.grid();
  kernel.require_resolved(grid);
  require_stable_mesh(mesh, kernel, params, grid);

  FlowTrajectory traj;
  traj.mesh = mesh;
  const Density start = smoothed_initial_density(m0);
  traj.densities.assign(mesh.points(), start);

  for (int it = 1; it <= options.max_iter; ++it) {
    const ScalarField u_terminal = terminal_value(kernel, params, options, traj.densities.back());
    traj.values = solve_hjb_backward(traj.densities, kernel, params, u_terminal, mesh);
    double clipped = 0.0;
    std::vector<Density> raw = solve_fp_forward(traj.values, start, params, mesh, &clipped);
    traj.max_clipped_mass = std::max(traj.max_clipped_mass, clipped);

    double step = 0.0;
    for (int i = 0; i < mesh.points(); ++i) {
      ScalarField mixed = traj.densities[i].field() * (1.0 - options.damping);
      mixed += raw[i].field() * options.damping;
      Density next = Density::normalized(std::move(mixed));
      step = std::max(step, density_distance(next, traj.densities[i]));
      traj.densities[i] = std::move(next);
    }
    traj.picard_iters = it;
    traj.picard_steps.push_back(step);
    if (step <= options.tol) {
      traj.converged = true;
      break;
    }
  }
  // Pair the returned values with the final flow so both discrete equations hold together.
  if (traj.converged) {
    const ScalarField u_terminal = terminal_value(kernel, params, options, traj.densities.back());
    traj.values = solve_hjb_backward(traj.densities, kernel, params, u_terminal, mesh);
  }
  return traj;
}

}  // namespace tmfg
