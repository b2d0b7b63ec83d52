#pragma once

// Time-dependent discounted MFG on a truncated horizon [0, T]:
//   -d_t u + rho u - nu Lap u + 1/2 |grad u|^2 = f(x, mu_t),   u(T) given,
//    d_t m - nu Lap m - div(m grad u) = 0,                     m(0) = mu_0,
// discretized with IMEX Euler steps (stiff linear parts implicit through Fourier
// multipliers, nonlinear/transport parts explicit) and coupled by damped
// forward-backward Picard iteration on the density flow.

#include <filesystem>
#include <string>
#include <vector>

#include "torusmfg/coupling.hpp"
#include "torusmfg/stationary.hpp"

namespace tmfg {

struct TimeMesh {
  double horizon = 1.0;  // T
  int steps = 1;         // M

  /// Throws InvalidArgument unless T > 0 and M >= 1.
  TimeMesh(double horizon, int steps);

  double dt() const noexcept { return horizon / steps; }
  double time(int i) const noexcept { return i == steps ? horizon : i * dt(); }
  int points() const noexcept { return steps + 1; }
};

/// Largest admissible step: min(0.5 / rho, 0.25 h / (1 + G / rho)) with G the a-priori bound
/// on |grad f| from FourierKernel::cost_gradient_bound().
double max_time_step(const FourierKernel& kernel, const ModelParams& params, const TorusGrid& grid);

/// Throws InvalidArgument when mesh.dt() exceeds max_time_step().
void require_stable_mesh(const TimeMesh& mesh, const FourierKernel& kernel, const ModelParams& params,
                         const TorusGrid& grid);

/// Norm beyond which the value function is considered to have blown up.
inline constexpr double kBlowUpThreshold = 1e6;
/// Per-step mass added by clipping undershoots: recorded up to this level, rejected above.
inline constexpr double kMaxClippedMass = 1e-6;
/// Mollification time applied to the initial density.
inline constexpr double kInitialSmoothing = 1e-4;

/// Backward march u_i = (1 + dt (rho - nu Lap))^{-1} [u_{i+1} + dt (f(., mu_i) - 1/2 |grad u_{i+1}|^2)].
/// Throws BlowUpError when |u_i|_inf exceeds kBlowUpThreshold.
std::vector<ScalarField> solve_hjb_backward(const std::vector<Density>& flow, const FourierKernel& kernel,
                                            const ModelParams& params, const ScalarField& u_terminal,
                                            const TimeMesh& mesh);

/// Forward march m_{i+1} = (1 - dt nu Lap)^{-1} [m_i + dt div(m_i grad u_{i+1})]. Undershoots below
/// the positivity floor are clipped and the mass renormalized; the largest clipped mass per step is
/// stored in *max_clipped_mass when given. Throws BlowUpError when a step clips more than kMaxClippedMass.
std::vector<Density> solve_fp_forward(const std::vector<ScalarField>& values, const Density& m0,
                                      const ModelParams& params, const TimeMesh& mesh,
                                      double* max_clipped_mass = nullptr);

enum class TerminalMode { stationary, zero };

TerminalMode parse_terminal_mode(const std::string& name);
std::string to_string(TerminalMode mode);

struct PicardOptions {
  double damping = 0.5;
  double tol = 1e-10;  // sup over times of the density distance between sweeps
  int max_iter = 500;
  TerminalMode terminal = TerminalMode::stationary;
  StationaryConfig stationary{};  // used for the terminal value when terminal == stationary

  void validate() const;
};

struct FlowTrajectory {
  TimeMesh mesh{1.0, 1};
  std::vector<Density> densities;  // mu_i, i = 0..M
  std::vector<ScalarField> values;  // u_i, i = 0..M
  bool converged = false;
  int picard_iters = 0;
  std::vector<double> picard_steps;  // sup_i distance per sweep
  double max_clipped_mass = 0.0;

  const TorusGrid& grid() const { return densities.front().grid(); }
};

/// Damped Picard iteration; the initial density is mollified by heat_evolve(., kInitialSmoothing).
/// Returns an unconverged trajectory (converged = false) when max_iter is exhausted.
FlowTrajectory solve_mfg(const FourierKernel& kernel, const ModelParams& params, const Density& m0,
                         const TimeMesh& mesh, const PicardOptions& options);

/// mollified initial density used by solve_mfg.
Density smoothed_initial_density(const Density& m0);

// Trajectory export: mesh.json, u_%04d.tgf / m_%04d.tgf every `stride` steps (the last step is
// always included), and trajectory.csv with t, mass, entropy, fisher, q_1, W1-to-uniform (d = 1)
// or L1-to-uniform (d = 2), sup |grad u|.

void write_trajectory(const std::filesystem::path& dir, const FlowTrajectory& trajectory, int stride = 1);

}  // namespace tmfg
