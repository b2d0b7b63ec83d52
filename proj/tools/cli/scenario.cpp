#include "scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "torusmfg/oracles.hpp"

namespace tmfg::cli {

namespace {

using json = nlohmann::json;

// Strict view of one config table: every key must be consumed before finish().
class Section {
 public:
  Section(const json& root, const std::string& name) : name_(name) {
    if (!root.contains(name)) return;
    if (!root[name].is_object()) throw ConfigError("[" + name + "] must be a table");
    table_ = &root[name];
  }

  bool has(const char* key) const { return table_ && table_->contains(key); }

  void read(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) fail(key, "an integer");
      out = v->get<int>();
    }
  }
  void read(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) fail(key, "a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) fail(key, "a boolean");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }
  void read(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    read(key, s);
    if (!s.empty()) out = (base.empty() || std::filesystem::path(s).is_absolute()) ? std::filesystem::path(s) : base / s;
  }
  void read(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) fail(key, "an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }
  void read(const char* key, WaveVector& out) {
    if (const json* v = take(key)) out = wave_vector(*v, key);
  }
  const json* take(const char* key) {
    if (!has(key)) return nullptr;
    used_.insert(key);
    return &(*table_)[key];
  }

  WaveVector wave_vector(const json& v, const char* key) const {
    if (!v.is_array() || v.empty() || v.size() > 2) fail(key, "an array of 1 or 2 integers");
    WaveVector k{0, 0};
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) fail(key, "an array of 1 or 2 integers");
      k[i] = v[i].get<int>();
    }
    return k;
  }

  void finish() const {
    if (!table_) return;
    for (const auto& item : table_->items())
      if (!used_.count(item.key())) throw ConfigError("unknown key \"" + item.key() + "\" in [" + name_ + "]");
  }

  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError("[" + name_ + "] " + key + " must be " + what);
  }

 private:
  std::string name_;
  const json* table_ = nullptr;
  std::set<std::string> used_;
};

const std::set<std::string> kSections{"kernel", "params", "grid",   "initial",  "mesh", "solver",
                                      "stationary", "output", "sweep", "criteria", "run"};

std::string toml_scalar(const nlohmann::ordered_json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) {
    std::string s = v.dump();
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  }
  if (v.is_string()) return v.dump();
  if (v.is_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + toml_scalar(v[i]);
    return s + "]";
  }
  throw ConfigError("cannot render value as TOML");
}

bool is_table_array(const nlohmann::ordered_json& v) { return v.is_array() && !v.empty() && v[0].is_object(); }

}  // namespace

void ScenarioConfig::validate() const {
  try {
    params.validate();
    (void)grid();
    if (kernel.preset == "kuramoto" && !(kernel.kappa > 0.0))
      throw ConfigError("[kernel] kappa must be positive for the kuramoto preset");
    if (kernel.preset == "file" && kernel.file.empty()) throw ConfigError("[kernel] preset \"file\" needs file");
    build_kernel().require_resolved(grid());
    if (initial.type == "file" && initial.file.empty()) throw ConfigError("[initial] type \"file\" needs file");
    if (initial.type != "file") (void)initial_density();
    (void)mesh();
    picard.validate();
    picard.stationary.validate();
    if (output.trajectory_stride < 1 || output.flattening_stride < 1)
      throw ConfigError("[output] strides must be >= 1");
    if (output.shift_lattice < 2) throw ConfigError("[output] shift_lattice must be >= 2");
    if (!(output.flattening_window > 0.0)) throw ConfigError("[output] flattening_window must be positive");
    if (random_seeds < 0) throw ConfigError("[run] random_seeds must be >= 0");
    if (jobs < 0) throw ConfigError("[run] jobs must be >= 0");
    for (double k : sweep_kappas)
      if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("[sweep] kappas must be positive");
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

TorusGrid ScenarioConfig::grid() const { return TorusGrid(dim, points_per_axis); }

FourierKernel ScenarioConfig::build_kernel() const {
  if (kernel.preset == "kuramoto") return FourierKernel::kuramoto(kernel.kappa);
  if (kernel.preset == "zero") return FourierKernel();
  if (kernel.preset == "inline") return FourierKernel(kernel.c0, kernel.modes);
  if (kernel.preset == "file") return read_kernel_file(kernel.file);
  throw ConfigError("[kernel] preset must be kuramoto, zero, inline or file");
}

Density ScenarioConfig::initial_density() const {
  const TorusGrid g = grid();
  if (initial.type == "uniform") return Density::uniform(g);
  if (initial.type == "m_eps") return m_eps_family(initial.eps, initial.k, g);
  if (initial.type == "von_mises") return von_mises(initial.beta, g);
  if (initial.type == "file") {
    Density m = read_density_csv(initial.file);
    if (!(m.grid() == g)) throw ConfigError("initial density file does not match [grid]");
    return m;
  }
  throw ConfigError("[initial] type must be uniform, m_eps, von_mises or file");
}

TimeMesh ScenarioConfig::mesh() const { return TimeMesh(horizon, steps); }

std::vector<StationarySeed> ScenarioConfig::stationary_seeds() const {
  const TorusGrid g = grid();
  std::vector<StationarySeed> seeds = default_seed_library(g);
  if (random_seeds > 0) {
    if (g.dim() != 1) throw ConfigError("[run] random_seeds is only supported for d = 1");
    std::mt19937_64 rng(seed);
    for (int i = 0; i < random_seeds; ++i)
      seeds.push_back({"random(" + std::to_string(i) + ")", random_positive_density(rng, 4, g)});
  }
  return seeds;
}

ScenarioConfig scenario_from_json(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw ConfigError("configuration must be a table of sections");
  for (const auto& item : j.items())
    if (!kSections.count(item.key())) throw ConfigError("unknown section [" + item.key() + "]");

  ScenarioConfig c;
  {
    Section s(j, "kernel");
    s.read("preset", c.kernel.preset);
    s.read("kappa", c.kernel.kappa);
    s.read("c0", c.kernel.c0);
    s.read("file", c.kernel.file, base);
    if (const json* modes = s.take("modes")) {
      if (!modes->is_array()) throw ConfigError("[kernel] modes must be an array of {k, c} tables");
      for (const auto& m : *modes) {
        if (!m.is_object() || !m.contains("k") || !m.contains("c") || m.size() != 2 || !m["c"].is_number())
          throw ConfigError("[kernel] every mode needs exactly k = [ints] and c = number");
        c.kernel.modes.push_back({s.wave_vector(m["k"], "modes.k"), m["c"].get<double>()});
      }
    }
    s.finish();
  }
  {
    Section s(j, "params");
    s.read("rho", c.params.rho);
    s.read("nu", c.params.nu);
    s.finish();
  }
  {
    Section s(j, "grid");
    s.read("dim", c.dim);
    s.read("n", c.points_per_axis);
    s.finish();
  }
  {
    Section s(j, "initial");
    s.read("type", c.initial.type);
    s.read("beta", c.initial.beta);
    s.read("eps", c.initial.eps);
    s.read("k", c.initial.k);
    s.read("file", c.initial.file, base);
    s.finish();
  }
  {
    Section s(j, "mesh");
    s.read("horizon", c.horizon);
    s.read("steps", c.steps);
    s.finish();
  }
  {
    Section s(j, "solver");
    s.read("damping", c.picard.damping);
    s.read("tol", c.picard.tol);
    s.read("max_iter", c.picard.max_iter);
    std::string terminal = to_string(c.picard.terminal);
    s.read("terminal_mode", terminal);
    try {
      c.picard.terminal = parse_terminal_mode(terminal);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("[solver] ") + e.what());
    }
    s.finish();
  }
  {
    Section s(j, "stationary");
    StationaryConfig& st = c.picard.stationary;
    s.read("damping", st.damping);
    s.read("min_damping", st.min_damping);
    s.read("tol_fixed_point", st.tol_fixed_point);
    s.read("tol_pde", st.tol_pde);
    s.read("max_outer", st.max_outer);
    s.read("max_hjb_inner", st.max_hjb_inner);
    s.read("anderson_depth", st.anderson_depth);
    s.read("dedup_tol", st.dedup_tol);
    s.finish();
  }
  {
    Section s(j, "output");
    s.read("dir", c.output.dir, base);
    s.read("trajectory", c.output.trajectory);
    s.read("trajectory_stride", c.output.trajectory_stride);
    s.read("shift_lattice", c.output.shift_lattice);
    s.read("flattening_window", c.output.flattening_window);
    s.read("flattening_stride", c.output.flattening_stride);
    s.finish();
  }
  {
    Section s(j, "sweep");
    s.read("kappas", c.sweep_kappas);
    s.finish();
  }
  {
    Section s(j, "criteria");
    if (const json* d = s.take("densities")) {
      if (!d->is_array()) throw ConfigError("[criteria] densities must be an array of paths");
      for (const auto& p : *d) {
        if (!p.is_string()) throw ConfigError("[criteria] densities must be an array of paths");
        const std::filesystem::path path = p.get<std::string>();
        c.criteria_densities.push_back(base.empty() || path.is_absolute() ? path : base / path);
      }
    }
    s.finish();
  }
  {
    Section s(j, "run");
    s.read("seed", c.seed);
    s.read("jobs", c.jobs);
    s.read("random_seeds", c.random_seeds);
    s.finish();
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  json j;
  if (path.extension() == ".json") {
    try {
      j = json::parse(text.str());
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  } else {
    try {
      const toml::table table = toml::parse(text.str(), path.string());
      std::ostringstream as_json;
      as_json << toml::json_formatter{table};
      j = json::parse(as_json.str());
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << path.string() << ":" << e.source().begin.line << ": " << e.description();
      throw ConfigError(msg.str());
    }
  }
  return scenario_from_json(j, path.parent_path());
}

namespace {

std::string path_text(const std::filesystem::path& p) {
  return p.empty() ? std::string() : std::filesystem::absolute(p).lexically_normal().string();
}

}  // namespace

nlohmann::ordered_json scenario_to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  auto& k = j["kernel"];
  k["preset"] = c.kernel.preset;
  k["kappa"] = c.kernel.kappa;
  k["c0"] = c.kernel.c0;
  k["file"] = path_text(c.kernel.file);
  k["modes"] = nlohmann::ordered_json::array();
  for (const KernelMode& m : c.kernel.modes)
    k["modes"].push_back({{"k", m.k[1] == 0 ? nlohmann::ordered_json{m.k[0]} : nlohmann::ordered_json{m.k[0], m.k[1]}},
                          {"c", m.c}});
  j["params"] = {{"rho", c.params.rho}, {"nu", c.params.nu}};
  j["grid"] = {{"dim", c.dim}, {"n", c.points_per_axis}};
  j["initial"] = {{"type", c.initial.type},
                  {"beta", c.initial.beta},
                  {"eps", c.initial.eps},
                  {"k", c.initial.k[1] == 0 ? nlohmann::ordered_json{c.initial.k[0]}
                                            : nlohmann::ordered_json{c.initial.k[0], c.initial.k[1]}},
                  {"file", path_text(c.initial.file)}};
  j["mesh"] = {{"horizon", c.horizon}, {"steps", c.steps}};
  j["solver"] = {{"damping", c.picard.damping},
                 {"tol", c.picard.tol},
                 {"max_iter", c.picard.max_iter},
                 {"terminal_mode", to_string(c.picard.terminal)}};
  const StationaryConfig& st = c.picard.stationary;
  j["stationary"] = {{"damping", st.damping},
                     {"min_damping", st.min_damping},
                     {"tol_fixed_point", st.tol_fixed_point},
                     {"tol_pde", st.tol_pde},
                     {"max_outer", st.max_outer},
                     {"max_hjb_inner", st.max_hjb_inner},
                     {"anderson_depth", st.anderson_depth},
                     {"dedup_tol", st.dedup_tol}};
  j["output"] = {{"dir", path_text(c.output.dir)},
                 {"trajectory", c.output.trajectory},
                 {"trajectory_stride", c.output.trajectory_stride},
                 {"shift_lattice", c.output.shift_lattice},
                 {"flattening_window", c.output.flattening_window},
                 {"flattening_stride", c.output.flattening_stride}};
  j["sweep"] = {{"kappas", c.sweep_kappas}};
  j["criteria"]["densities"] = nlohmann::ordered_json::array();
  for (const auto& p : c.criteria_densities) j["criteria"]["densities"].push_back(path_text(p));
  j["run"] = {{"seed", c.seed}, {"jobs", c.jobs}, {"random_seeds", c.random_seeds}};
  return j;
}

std::string scenario_to_toml(const ScenarioConfig& c) {
  const nlohmann::ordered_json j = scenario_to_json(c);
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, table] : j.items()) {
    out << (first ? "" : "\n") << '[' << section << "]\n";
    first = false;
    for (const auto& [key, value] : table.items()) {
      if (is_table_array(value) || (value.is_string() && value.get<std::string>().empty())) continue;
      out << key << " = " << toml_scalar(value) << '\n';
    }
    for (const auto& [key, value] : table.items()) {
      if (!is_table_array(value)) continue;
      for (const auto& entry : value) {
        out << "\n[[" << section << '.' << key << "]]\n";
        for (const auto& [ek, ev] : entry.items()) out << ek << " = " << toml_scalar(ev) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace tmfg::cli
