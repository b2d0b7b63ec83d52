#include "torusmfg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace tmfg {

ScalarField q_field(const ScalarField& u, const Density& m, double nu) {
  if (!(u.grid() == m.grid())) throw InvalidArgument("q_field: u and m live on different grids");
  return u + log_density(m) * nu;
}

double q_energy(const ScalarField& u, const Density& m, double nu) {
  ScalarField integrand = gradient(q_field(u, m, nu)).squared_norm();
  integrand *= m.field();
  return integrate(integrand);
}

Diagnostics diagnose(const FlowTrajectory& traj, const FourierKernel& kernel, const ModelParams& params) {
  params.validate();
  const int points = traj.mesh.points();
  if (points < 3) throw InvalidArgument("diagnose: need at least 3 time points");
  if (static_cast<int>(traj.densities.size()) != points || static_cast<int>(traj.values.size()) != points)
    throw InvalidArgument("diagnose: trajectory arrays do not match the mesh");

  Diagnostics diag;
  diag.advisory = !traj.converged;
  diag.qen.resize(points);
  diag.lyap.resize(points);
  std::vector<FreeEnergy> energy(points);
  for (int i = 0; i < points; ++i) {
    energy[i] = free_energy_terms(kernel, params, traj.densities[i]);
    diag.qen[i] = q_energy(traj.values[i], traj.densities[i], params.nu);
    diag.lyap[i] = energy[i].total - 0.5 * diag.qen[i];
  }
  const double dt = traj.mesh.dt();
  for (int i = 1; i + 1 < points; ++i) {
    DiagnosticsRow row;
    row.index = i;
    row.t = traj.mesh.time(i);
    row.ent = energy[i].entropy;
    row.fisher = energy[i].fisher;
    row.pot = energy[i].potential;
    row.phi = energy[i].total;
    row.qen = diag.qen[i];
    row.lyap = diag.lyap[i];
    const double rate = (diag.lyap[i + 1] - diag.lyap[i - 1]) / (2.0 * dt);
    row.lyap_residual_abs = std::abs(rate + params.rho * row.qen);
    row.lyap_residual_rel = row.lyap_residual_abs / std::max(params.rho * row.qen, 1e-6);
    diag.rows.push_back(row);
  }
  return diag;
}

double max_relative_residual(const Diagnostics& diag, double t_from, double t_to) {
  double worst = 0.0;
  for (const DiagnosticsRow& r : diag.rows)
    if (r.t >= t_from && r.t <= t_to) worst = std::max(worst, r.lyap_residual_rel);
  return worst;
}

double max_lyapunov_increase(const Diagnostics& diag) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < diag.lyap.size(); ++i) worst = std::max(worst, diag.lyap[i] - diag.lyap[i - 1]);
  return worst;
}

double trapezoid(const std::vector<double>& samples, double dt, int from, int to) {
  if (from < 0 || to < from || to >= static_cast<int>(samples.size()))
    throw InvalidArgument("trapezoid: index range out of bounds");
  double sum = 0.0;
  for (int i = from; i < to; ++i) sum += 0.5 * (samples[i] + samples[i + 1]);
  return sum * dt;
}

ShiftBound shift_bound_check(const FlowTrajectory& traj, const std::vector<double>& qen, int s, int t) {
  const int points = traj.mesh.points();
  if (s < 0 || t < 0 || s >= points || t >= points) throw InvalidArgument("shift_bound_check: index out of range");
  if (static_cast<int>(qen.size()) != points) throw InvalidArgument("shift_bound_check: Q series length mismatch");
  if (s > t) std::swap(s, t);
  ShiftBound r;
  r.s = s;
  r.t = t;
  const Density& a = traj.densities[s];
  const Density& b = traj.densities[t];
  r.lhs = traj.grid().dim() == 1 ? wasserstein1_circle(a, b) : bounded_lipschitz_distance(a, b);
  const double elapsed = traj.mesh.time(t) - traj.mesh.time(s);
  r.rhs = std::sqrt(elapsed) * std::sqrt(std::max(0.0, trapezoid(qen, traj.mesh.dt(), s, t)));
  r.passes = r.lhs <= r.rhs + 1e-6;
  return r;
}

std::vector<ShiftBound> shift_bound_lattice(const FlowTrajectory& traj, const std::vector<double>& qen,
                                            int points) {
  if (points < 2) throw InvalidArgument("shift_bound_lattice: need at least 2 lattice points");
  const int last = traj.mesh.steps;
  std::vector<int> lattice;
  for (int j = 0; j < points; ++j) {
    const int idx = static_cast<int>(std::lround(static_cast<double>(j) * last / (points - 1)));
    if (lattice.empty() || lattice.back() != idx) lattice.push_back(idx);
  }
  std::vector<ShiftBound> out;
  for (std::size_t a = 0; a < lattice.size(); ++a)
    for (std::size_t b = a + 1; b < lattice.size(); ++b)
      out.push_back(shift_bound_check(traj, qen, lattice[a], lattice[b]));
  return out;
}

std::vector<FlatteningRow> flattening_report(const FlowTrajectory& traj, double window, int stride) {
  if (!(window > 0.0)) throw InvalidArgument("flattening_report: window must be positive");
  if (stride < 1) throw InvalidArgument("flattening_report: stride must be >= 1");
  const int span = static_cast<int>(std::lround(window / traj.mesh.dt()));
  if (span < 1) throw InvalidArgument("flattening_report: window shorter than one time step");
  std::vector<FlatteningRow> rows;
  for (int i = 0; i + span <= traj.mesh.steps; i += stride) {
    FlatteningRow row{i, traj.mesh.time(i), 0.0};
    for (int s = std::min(stride, span); s <= span; s += stride)
      row.value = std::max(row.value, density_distance(traj.densities[i], traj.densities[i + s]));
    if (span % stride != 0)
      row.value = std::max(row.value, density_distance(traj.densities[i], traj.densities[i + span]));
    rows.push_back(row);
  }
  return rows;
}

LyapunovLowerBound lyapunov_lower_bound(const FlowTrajectory& traj, const Diagnostics& diag,
                                        const FourierKernel& kernel, const ModelParams& params) {
  LyapunovLowerBound r;
  r.min_lyap = *std::min_element(diag.lyap.begin(), diag.lyap.end());
  double grad_sq = 0.0;
  double lap = 0.0;
  for (const ScalarField& u : traj.values) {
    grad_sq = std::max(grad_sq, gradient(u).squared_norm().max());
    lap = std::max(lap, laplacian(u).sup_norm());
  }
  r.c0 = 0.5 * grad_sq + params.nu * lap;
  r.potential_floor = kernel.c0() - lambda_upper_bound(kernel);
  r.bound = r.potential_floor - r.c0 - params.rho * params.nu * traj.grid().volume();
  r.passes = r.min_lyap >= r.bound;
  return r;
}

GradientBound gradient_bound_check(const FlowTrajectory& traj, const FourierKernel& kernel,
                                   const ModelParams& params) {
  params.validate();
  GradientBound r;
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    r.max_grad_u = std::max(r.max_grad_u, gradient(traj.values[i]).sup_norm());
    r.max_grad_f = std::max(r.max_grad_f, gradient(interaction_cost(kernel, traj.densities[i])).sup_norm());
  }
  r.bound = r.max_grad_f / params.rho + 1e-6;
  r.passes = r.max_grad_u <= r.bound;
  return r;
}

void write_diagnostics_csv(const std::filesystem::path& path, const Diagnostics& diag) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "t,ent,fisher,pot,phi,qen,lyap,lyap_residual_abs,lyap_residual_rel\n";
  char line[512];
  for (const DiagnosticsRow& r : diag.rows) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.ent,
                  r.fisher, r.pot, r.phi, r.qen, r.lyap, r.lyap_residual_abs, r.lyap_residual_rel);
    out << line;
  }
}

void write_shift_bound_csv(const std::filesystem::path& path, const std::vector<ShiftBound>& checks) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "s,t,lhs,rhs,pass\n";
  char line[256];
  for (const ShiftBound& c : checks) {
    std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%d\n", c.s, c.t, c.lhs, c.rhs, c.passes ? 1 : 0);
    out << line;
  }
}

}  // namespace tmfg
