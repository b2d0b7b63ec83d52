#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "torusmfg/diagnostics.hpp"
#include "torusmfg/field_io.hpp"
#include "torusmfg/oracles.hpp"
#include "torusmfg/parallel.hpp"

namespace tmfg::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr WaveVector kFirstMode{1, 0};

// Writes through a sibling temporary and renames it into place.
void atomic_write(const fs::path& path, const std::function<void(const fs::path&)>& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  writer(tmp);
  fs::rename(tmp, path);
}

void write_text(const fs::path& path, const std::string& text) {
  atomic_write(path, [&](const fs::path& tmp) {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out << text;
    if (!out) throw FormatError("write failed for " + tmp.string());
  });
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

std::string file_label(const std::string& label) {
  std::string s;
  for (char ch : label) s += std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' ? ch : '_';
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

double q1(const Density& m) { return fourier_moment(m, kFirstMode).q; }

double distance_to_uniform(const Density& m) { return density_distance(m, Density::uniform(m.grid())); }

ojson params_json(const ModelParams& p) { return {{"rho", p.rho}, {"nu", p.nu}}; }

ojson kernel_json(const FourierKernel& k) { return ojson::parse(kernel_to_json(k)); }

ojson solution_json(const StationarySolution& s, const FourierKernel& kernel, const ModelParams& params) {
  return {{"seed", s.seed},
          {"q1", q1(s.m)},
          {"phi", free_energy(kernel, params, s.m)},
          {"distance_to_uniform", distance_to_uniform(s.m)},
          {"residual_hjb", s.residual_hjb},
          {"residual_fp", s.residual_fp},
          {"residual_const", s.residual_const},
          {"iterations", s.iterations}};
}

StationaryRun run_stationary(const ScenarioConfig& cfg, const FourierKernel& kernel, int jobs) {
  StationaryConfig st = cfg.picard.stationary;
  st.jobs = jobs;
  return solve_stationary_mfg(kernel, cfg.params, st, cfg.stationary_seeds());
}

}  // namespace

int cmd_stationary(const ScenarioConfig& cfg, std::ostream& log) {
  const FourierKernel kernel = cfg.build_kernel();
  const StationaryRun run = run_stationary(cfg, kernel, cfg.jobs);
  const fs::path dir = cfg.output.dir;

  ojson summary{{"schema", 1},
                {"command", "stationary"},
                {"kernel", kernel_json(kernel)},
                {"params", params_json(cfg.params)},
                {"grid", {{"dim", cfg.dim}, {"n", cfg.points_per_axis}}},
                {"seeds", ojson::array()},
                {"solutions", ojson::array()}};
  for (const SeedRun& sr : run.seeds) {
    const StationarySolution& s = sr.solution;
    summary["seeds"].push_back({{"label", s.seed},
                                {"converged", s.converged},
                                {"iterations", s.iterations},
                                {"q1", q1(s.m)},
                                {"residual_hjb", s.residual_hjb},
                                {"residual_fp", s.residual_fp},
                                {"residual_const", s.residual_const},
                                {"message", s.message}});
    std::string csv = "iter,W1_step,r_hjb,r_fp,r_const\n";
    for (const StationaryIteration& it : sr.history)
      csv += std::to_string(it.iter) + "," + g17(it.step) + "," + g17(it.r_hjb) + "," + g17(it.r_fp) + "," +
             g17(it.r_const) + "\n";
    write_text(dir / ("history_" + file_label(s.seed) + ".csv"), csv);
    log << (s.converged ? "converged " : "FAILED    ") << s.seed << ": iterations=" << s.iterations
        << fmt(" q1=%.3e r_hjb=%.2e r_fp=%.2e", q1(s.m), s.residual_hjb, s.residual_fp)
        << (s.converged ? "" : " (" + s.message + ")") << '\n';
  }
  for (std::size_t i = 0; i < run.solutions.size(); ++i) {
    const StationarySolution& s = run.solutions[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "solution_%02zu", i);
    ojson entry = solution_json(s, kernel, cfg.params);
    entry["density_file"] = std::string(stem) + "_m.csv";
    entry["value_file"] = std::string(stem) + "_u.tgf";
    summary["solutions"].push_back(entry);
    atomic_write(dir / (std::string(stem) + "_m.csv"), [&](const fs::path& tmp) { write_density_csv(tmp, s.m); });
    atomic_write(dir / (std::string(stem) + "_u.tgf"), [&](const fs::path& tmp) { write_field(tmp, s.u); });
    log << "solution " << i << " (seed " << s.seed << ")"
        << fmt(": q1=%.6e phi=%.10g dist_uniform=%.3e", q1(s.m), free_energy(kernel, cfg.params, s.m),
               distance_to_uniform(s.m))
        << '\n';
  }
  summary["all_converged"] = run.all_converged();
  write_json(dir / "stationary_summary.json", summary);
  log << run.solutions.size() << " distinct solution(s); " << (run.all_converged() ? "all" : "NOT all")
      << " seeds converged\n";
  return run.all_converged() ? kSuccess : kNotConverged;
}

int cmd_evolve(const ScenarioConfig& cfg, std::ostream& log) {
  const FourierKernel kernel = cfg.build_kernel();
  const TimeMesh mesh = cfg.mesh();
  PicardOptions picard = cfg.picard;
  picard.stationary.jobs = cfg.jobs;
  const FlowTrajectory traj = solve_mfg(kernel, cfg.params, cfg.initial_density(), mesh, picard);
  const Diagnostics diag = diagnose(traj, kernel, cfg.params);
  const std::vector<ShiftBound> shifts = shift_bound_lattice(traj, diag.qen, cfg.output.shift_lattice);
  const std::vector<FlatteningRow> flat =
      flattening_report(traj, cfg.output.flattening_window, cfg.output.flattening_stride);
  const GradientBound grad = gradient_bound_check(traj, kernel, cfg.params);
  const LyapunovLowerBound lower = lyapunov_lower_bound(traj, diag, kernel, cfg.params);
  const double lyap_increase = max_lyapunov_increase(diag);
  const bool shift_ok = std::all_of(shifts.begin(), shifts.end(), [](const ShiftBound& s) { return s.passes; });
  const bool monotone_ok = lyap_increase <= 1e-8;
  const double band = std::min(0.5, 0.25 * mesh.horizon);
  const double band_residual = max_relative_residual(diag, band, mesh.horizon - band);
  const Density& final_m = traj.densities.back();

  const fs::path dir = cfg.output.dir;
  if (cfg.output.trajectory) {
    fs::create_directories(dir);
    const fs::path target = dir / "trajectory";
    fs::path tmp = target;
    tmp += ".tmp";
    fs::remove_all(tmp);
    write_trajectory(tmp, traj, cfg.output.trajectory_stride);
    fs::remove_all(target);
    fs::rename(tmp, target);
  }
  atomic_write(dir / "diagnostics.csv", [&](const fs::path& tmp) { write_diagnostics_csv(tmp, diag); });
  atomic_write(dir / "shift_bound.csv", [&](const fs::path& tmp) { write_shift_bound_csv(tmp, shifts); });
  std::string csv = "index,t,value\n";
  for (const FlatteningRow& r : flat) csv += std::to_string(r.index) + "," + g17(r.t) + "," + g17(r.value) + "\n";
  write_text(dir / "flattening.csv", csv);

  const bool invariants_ok = monotone_ok && shift_ok && grad.passes && lower.passes;
  ojson summary{{"schema", 1},
                {"command", "evolve"},
                {"kernel", kernel_json(kernel)},
                {"params", params_json(cfg.params)},
                {"grid", {{"dim", cfg.dim}, {"n", cfg.points_per_axis}}},
                {"mesh", {{"horizon", mesh.horizon}, {"steps", mesh.steps}, {"dt", mesh.dt()}}},
                {"converged", traj.converged},
                {"picard_iterations", traj.picard_iters},
                {"max_clipped_mass", traj.max_clipped_mass},
                {"advisory", diag.advisory},
                {"final", {{"q1", q1(final_m)}, {"distance_to_uniform", distance_to_uniform(final_m)}}},
                {"lyapunov",
                 {{"band", {band, mesh.horizon - band}},
                  {"max_relative_residual", band_residual},
                  {"max_increase", lyap_increase},
                  {"monotone", monotone_ok}}},
                {"shift_bound", {{"pairs", shifts.size()}, {"passes", shift_ok}}},
                {"gradient_bound",
                 {{"max_grad_u", grad.max_grad_u},
                  {"max_grad_f", grad.max_grad_f},
                  {"bound", grad.bound},
                  {"passes", grad.passes}}},
                {"lyapunov_lower_bound",
                 {{"min_lyap", lower.min_lyap}, {"bound", lower.bound}, {"passes", lower.passes}}},
                {"invariants_pass", invariants_ok}};
  write_json(dir / "evolve_summary.json", summary);

  log << (traj.converged ? "Picard converged" : "Picard did NOT converge") << " after " << traj.picard_iters
      << " sweeps\n"
      << fmt("final: q1=%.3e distance_to_uniform=%.3e\n", q1(final_m), distance_to_uniform(final_m))
      << fmt("Lyapunov: max relative residual %.3e on the band, max increase %.3e\n", band_residual, lyap_increase)
      << "shift bound: " << (shift_ok ? "pass" : "FAIL") << " on " << shifts.size() << " pairs\n"
      << fmt("gradient bound: %.6g <= %.6g ", grad.max_grad_u, grad.bound) << (grad.passes ? "pass" : "FAIL")
      << '\n'
      << fmt("Lyapunov lower bound: min %.6g >= %.6g ", lower.min_lyap, lower.bound)
      << (lower.passes ? "pass" : "FAIL") << '\n';
  return traj.converged && invariants_ok ? kSuccess : kNotConverged;
}

int cmd_criteria(const ScenarioConfig& cfg, std::ostream& log) {
  const FourierKernel kernel = cfg.build_kernel();
  const bool monotone = is_lasry_lions_monotone(kernel);
  const double lambda = lambda_upper_bound(kernel);
  const double half_critical = 0.5 * critical_coupling(cfg.params);
  const bool lambda_certified = lambda < half_critical;

  log << "Lasry-Lions monotone: " << (monotone ? "yes => unique stationary equilibrium" : "no") << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "Lambda <= %g %s %g = kappa_c/2 => %s\n", lambda, lambda_certified ? "<" : ">=",
                half_critical, lambda_certified ? "uniqueness certified" : "no uniqueness certificate");
  log << line;

  ojson report{{"schema", 1},
               {"command", "criteria"},
               {"kernel", kernel_json(kernel)},
               {"params", params_json(cfg.params)},
               {"lasry_lions_monotone", monotone},
               {"lambda_upper_bound", lambda},
               {"critical_coupling", critical_coupling(cfg.params)},
               {"half_critical_coupling", half_critical},
               {"lambda_certified", lambda_certified},
               {"uniqueness_certified", monotone || lambda_certified},
               {"densities", ojson::array()}};
  for (const fs::path& path : cfg.criteria_densities) {
    const Density m = read_density_csv(path);
    const HeatFlowCriterion c = heat_flow_criterion(kernel, cfg.params, m);
    report["densities"].push_back({{"file", path.string()}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"passes", c.passes}});
    log << "heat-flow criterion " << path.string() << fmt(": %.10g >= %.10g ", c.lhs, c.rhs)
        << (c.passes ? "holds (stationarity not excluded)" : "fails => not a stationary equilibrium") << '\n';
  }
  write_json(fs::path(cfg.output.dir) / "criteria.json", report);
  return kSuccess;
}

int cmd_sweep(const ScenarioConfig& cfg, std::ostream& log) {
  if (cfg.sweep_kappas.empty())
    throw ConfigError("sweep needs at least one kappa: pass --kappa K [K ...] or set [sweep] kappas");
  if (cfg.kernel.preset != "kuramoto") throw ConfigError("sweep varies kappa of the kuramoto preset only");

  struct Point {
    double max_q1 = 0.0;
    std::size_t solutions = 0;
    bool converged = false;
  };
  std::vector<Point> points(cfg.sweep_kappas.size());
  parallel_for(points.size(), cfg.jobs, [&](std::size_t i) {
    const StationaryRun run = run_stationary(cfg, FourierKernel::kuramoto(cfg.sweep_kappas[i]), 1);
    Point& p = points[i];
    for (const StationarySolution& s : run.solutions) p.max_q1 = std::max(p.max_q1, q1(s.m));
    p.solutions = run.solutions.size();
    p.converged = run.all_converged();
  });

  std::string csv = "kappa,max_q1,solutions,converged\n";
  ojson summary{{"schema", 1},
                {"command", "sweep"},
                {"params", params_json(cfg.params)},
                {"critical_coupling", critical_coupling(cfg.params)},
                {"points", ojson::array()}};
  bool all_converged = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    all_converged = all_converged && p.converged;
    csv += g17(cfg.sweep_kappas[i]) + "," + g17(p.max_q1) + "," + std::to_string(p.solutions) + "," +
           (p.converged ? "1" : "0") + "\n";
    summary["points"].push_back({{"kappa", cfg.sweep_kappas[i]},
                                 {"max_q1", p.max_q1},
                                 {"solutions", p.solutions},
                                 {"converged", p.converged}});
    log << fmt("kappa=%-8g max_q1=%.6e", cfg.sweep_kappas[i], p.max_q1) << " solutions=" << p.solutions
        << (p.converged ? "" : " (not all seeds converged)") << '\n';
  }
  summary["all_converged"] = all_converged;
  write_text(fs::path(cfg.output.dir) / "sweep.csv", csv);
  write_json(fs::path(cfg.output.dir) / "sweep_summary.json", summary);
  return all_converged ? kSuccess : kNotConverged;
}

int cmd_verify(const ScenarioConfig& cfg, std::ostream& log) {
  VerificationOptions opt;
  opt.seed = cfg.seed;
  opt.points_per_axis = cfg.points_per_axis;
  opt.artifact_dir = fs::path(cfg.output.dir) / "verify_artifacts";
  const VerificationReport report = run_verification_suite(opt);
  const std::string text = text_summary(report);
  atomic_write(fs::path(cfg.output.dir) / "verify.xml",
               [&](const fs::path& tmp) { write_junit_xml(tmp, report); });
  write_text(fs::path(cfg.output.dir) / "verify.txt", text);
  log << text;
  return report.all_passed() ? kSuccess : kNotConverged;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discounted potential mean-field games on the torus", "torusmfg"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool print_config = false;
  std::vector<std::string> densities;
  std::vector<double> kappas;

  app.add_option("--config", config_path, "Scenario file (TOML, or JSON when named *.json)");
  CLI::Option* out_opt = app.add_option("--out", out_dir, "Output directory");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "Seed for every random choice (default 42)");
  CLI::Option* jobs_opt = app.add_option("--jobs", jobs, "Worker threads, 0 = all cores (default 1)");
  app.add_flag("--print-config", print_config, "Print the resolved configuration as TOML and exit");

  CLI::App* stationary = app.add_subcommand("stationary", "Multi-start stationary equilibrium solve");
  CLI::App* evolve = app.add_subcommand("evolve", "Time-dependent equilibrium with Lyapunov diagnostics");
  CLI::App* criteria = app.add_subcommand("criteria", "Uniqueness criteria and heat-flow test of densities");
  criteria->add_option("--density", densities, "Density CSV to test (repeatable)")->allow_extra_args(false);
  CLI::App* sweep = app.add_subcommand("sweep", "Kuramoto coupling sweep of the stationary order parameter");
  CLI::Option* kappa_opt = sweep->add_option("--kappa", kappas, "Coupling values (space or comma separated)");
  kappa_opt->delimiter(',');
  CLI::App* verify = app.add_subcommand("verify", "Run the numerical oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kConfigError;
  }

  try {
    ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : load_scenario(config_path);
    if (out_opt->count()) cfg.output.dir = out_dir;
    if (seed_opt->count()) cfg.seed = seed;
    if (jobs_opt->count()) cfg.jobs = jobs;
    if (kappa_opt->count()) cfg.sweep_kappas = kappas;
    for (const std::string& d : densities) cfg.criteria_densities.emplace_back(d);
    cfg.picard.stationary.jobs = cfg.jobs;
    cfg.validate();

    if (print_config) {
      out << scenario_to_toml(cfg);
      return kSuccess;
    }
    if (stationary->parsed()) return cmd_stationary(cfg, out);
    if (evolve->parsed()) return cmd_evolve(cfg, out);
    if (criteria->parsed()) return cmd_criteria(cfg, out);
    if (sweep->parsed()) return cmd_sweep(cfg, out);
    if (verify->parsed()) return cmd_verify(cfg, out);
    err << "error: a subcommand is required\n" << app.help();
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    if (sweep->parsed()) err << sweep->help();
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConvergenceError& e) {
    err << "not converged: " << e.what() << '\n';
    return kNotConverged;
  } catch (const BlowUpError& e) {
    err << "blow-up: " << e.what() << '\n';
    return kNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  }
}

}  // namespace tmfg::cli
