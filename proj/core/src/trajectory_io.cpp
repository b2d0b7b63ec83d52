#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "torusmfg/field_io.hpp"
#include "torusmfg/mfg_solver.hpp"

namespace tmfg {

namespace {

std::string numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d.tgf", prefix, i);
  return buf;
}

}  // namespace

void write_trajectory(const std::filesystem::path& dir, const FlowTrajectory& traj, int stride) {
  if (stride < 1) throw InvalidArgument("write_trajectory: stride must be >= 1");
  if (traj.densities.empty() || traj.values.size() != traj.densities.size())
    throw InvalidArgument("write_trajectory: empty or inconsistent trajectory");
  std::filesystem::create_directories(dir);
  const TorusGrid& grid = traj.grid();
  const Density uniform = Density::uniform(grid);

  std::vector<int> saved;
  for (int i = 0; i < traj.mesh.points(); i += stride) saved.push_back(i);
  if (saved.back() != traj.mesh.steps) saved.push_back(traj.mesh.steps);

  nlohmann::ordered_json meta;
  meta["schema"] = 1;
  meta["dim"] = grid.dim();
  meta["points_per_axis"] = grid.points_per_axis();
  meta["horizon"] = traj.mesh.horizon;
  meta["steps"] = traj.mesh.steps;
  meta["dt"] = traj.mesh.dt();
  meta["stride"] = stride;
  meta["converged"] = traj.converged;
  meta["picard_iters"] = traj.picard_iters;
  meta["max_clipped_mass"] = traj.max_clipped_mass;
  meta["saved_steps"] = saved;
  {
    std::ofstream out(dir / "mesh.json", std::ios::trunc);
    if (!out) throw FormatError("cannot write " + (dir / "mesh.json").string());
    out << meta.dump(2) << '\n';
  }

  std::ofstream csv(dir / "trajectory.csv", std::ios::trunc);
  if (!csv) throw FormatError("cannot write " + (dir / "trajectory.csv").string());
  csv << "i,t,mass,entropy,fisher,q1,dist_uniform,grad_u_sup\n";
  char line[512];
  for (int i : saved) {
    write_field(dir / numbered("u", i), traj.values[i]);
    write_field(dir / numbered("m", i), traj.densities[i].field());
    const Density& m = traj.densities[i];
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, traj.mesh.time(i),
                  integrate(m.field()), entropy(m), fisher_information(m), fourier_moment(m, {1, 0}).q,
                  density_distance(m, uniform), gradient(traj.values[i]).sup_norm());
    csv << line;
  }
}

}  // namespace tmfg
