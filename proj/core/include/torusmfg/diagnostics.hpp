#pragma once

// Lyapunov machinery along a computed trajectory:
//   q = u + nu log m,   Q = integral |grad q|^2 m,   L = Phi - Q / 2,   dL/dt = -rho Q,
// together with the shift bound W1(mu_s, mu_t) <= sqrt(t - s) (integral_s^t Q)^{1/2}
// and long-time flattening statistics.

#include <filesystem>
#include <vector>

#include "torusmfg/mfg_solver.hpp"

namespace tmfg {

/// u + nu log m.
ScalarField q_field(const ScalarField& u, const Density& m, double nu);
/// integral |grad q|^2 m.
double q_energy(const ScalarField& u, const Density& m, double nu);

struct DiagnosticsRow {
  int index = 0;
  double t = 0.0;
  double ent = 0.0;
  double fisher = 0.0;
  double pot = 0.0;
  double phi = 0.0;   // rho nu ent + nu^2/2 fisher + pot
  double qen = 0.0;   // Q
  double lyap = 0.0;  // phi - qen / 2
  double lyap_residual_abs = 0.0;  // |(L_{i+1} - L_{i-1}) / (2 dt) + rho Q_i|
  double lyap_residual_rel = 0.0;  // abs / max(rho Q_i, 1e-6)
};

struct Diagnostics {
  std::vector<DiagnosticsRow> rows;  // interior indices 1 .. M-1
  std::vector<double> qen;           // Q_i at every index 0 .. M
  std::vector<double> lyap;          // L_i at every index 0 .. M
  bool advisory = false;             // computed on an unconverged trajectory
};

/// Throws InvalidArgument for trajectories with fewer than 3 time points.
Diagnostics diagnose(const FlowTrajectory& trajectory, const FourierKernel& kernel, const ModelParams& params);

/// Largest relative Lyapunov residual over rows with t in [t_from, t_to].
double max_relative_residual(const Diagnostics& diag, double t_from, double t_to);
/// Largest increase L_{i+1} - L_i over the whole trajectory (<= 0 for a nonincreasing L).
double max_lyapunov_increase(const Diagnostics& diag);

/// Trapezoid integral of samples on the uniform mesh between indices from <= to.
double trapezoid(const std::vector<double>& samples, double dt, int from, int to);

struct ShiftBound {
  int s = 0;
  int t = 0;
  double lhs = 0.0;  // distance(mu_s, mu_t)
  double rhs = 0.0;  // sqrt(t - s) sqrt(integral_s^t Q)
  bool passes = false;
};

/// lhs is W1 in d = 1 and the bounded-Lipschitz distance in d = 2 (both dominated by the
/// Lipschitz-1 bound); passes = lhs <= rhs + 1e-6. qen holds Q_i for every index.
ShiftBound shift_bound_check(const FlowTrajectory& trajectory, const std::vector<double>& qen, int s, int t);

/// All ordered pairs s < t on a lattice of `points` indices spread evenly over 0 .. M.
std::vector<ShiftBound> shift_bound_lattice(const FlowTrajectory& trajectory, const std::vector<double>& qen,
                                            int points);

struct FlatteningRow {
  int index = 0;
  double t = 0.0;
  double value = 0.0;  // max over 0 < s <= window of distance(mu_t, mu_{t+s})
};

/// Evaluated every `stride` indices for t + window <= T, with s sampled every `stride` indices.
std::vector<FlatteningRow> flattening_report(const FlowTrajectory& trajectory, double window, int stride = 1);

struct LyapunovLowerBound {
  double min_lyap = 0.0;
  double c0 = 0.0;             // max 1/2 |grad u|^2 + nu max |Lap u|, observed
  double potential_floor = 0.0;  // lower bound on inf F: c0_kernel - lambda_upper_bound
  double bound = 0.0;          // potential_floor - c0 - rho nu (2 pi)^d
  bool passes = false;
};

LyapunovLowerBound lyapunov_lower_bound(const FlowTrajectory& trajectory, const Diagnostics& diag,
                                        const FourierKernel& kernel, const ModelParams& params);

struct GradientBound {
  double max_grad_u = 0.0;
  double max_grad_f = 0.0;
  double bound = 0.0;  // max_grad_f / rho + 1e-6
  bool passes = false;
};

/// max_t |grad u(t)|_inf <= (1 / rho) max_t |grad f(., mu_t)|_inf + 1e-6.
GradientBound gradient_bound_check(const FlowTrajectory& trajectory, const FourierKernel& kernel,
                                   const ModelParams& params);

void write_diagnostics_csv(const std::filesystem::path& path, const Diagnostics& diag);
void write_shift_bound_csv(const std::filesystem::path& path, const std::vector<ShiftBound>& checks);

}  // namespace tmfg
