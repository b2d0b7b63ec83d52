#pragma once

// Scenario configuration for the command-line front end. A scenario is read
// from TOML (or JSON when the file ends in .json), merged over built-in
// defaults, and validated strictly: unknown sections or keys are errors.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "torusmfg/mfg_solver.hpp"

namespace tmfg::cli {

/// Raised for every configuration problem; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KernelSpec {
  std::string preset = "kuramoto";  // kuramoto | zero | inline | file
  double kappa = 2.0;
  double c0 = 0.0;
  std::vector<KernelMode> modes;
  std::filesystem::path file;
};

struct InitialSpec {
  std::string type = "von_mises";  // uniform | m_eps | von_mises | file
  double beta = 2.0;
  double eps = 0.2;
  WaveVector k{1, 0};
  std::filesystem::path file;
};

struct OutputSpec {
  std::filesystem::path dir = "torusmfg-out";
  bool trajectory = true;
  int trajectory_stride = 100;
  int shift_lattice = 40;
  double flattening_window = 1.0;
  int flattening_stride = 100;
};

struct ScenarioConfig {
  KernelSpec kernel;
  ModelParams params;
  int dim = 1;
  int points_per_axis = 128;
  InitialSpec initial;
  double horizon = 20.0;
  int steps = 20000;
  PicardOptions picard;
  int random_seeds = 0;  // extra random stationary seeds drawn from `seed`
  OutputSpec output;
  std::vector<double> sweep_kappas;
  std::vector<std::filesystem::path> criteria_densities;
  std::uint64_t seed = 42;
  int jobs = 1;

  /// Throws ConfigError on any invalid or unresolvable setting.
  void validate() const;
  TorusGrid grid() const;
  FourierKernel build_kernel() const;
  Density initial_density() const;
  TimeMesh mesh() const;
  /// Built-in seed library plus `random_seeds` random positive densities (d = 1).
  std::vector<StationarySeed> stationary_seeds() const;
};

/// Defaults overlaid with the file contents; relative paths resolve against the file's directory.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::ordered_json scenario_to_json(const ScenarioConfig& cfg);
/// TOML rendering of scenario_to_json (used by --print-config).
std::string scenario_to_toml(const ScenarioConfig& cfg);

}  // namespace tmfg::cli
