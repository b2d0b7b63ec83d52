#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "torusmfg/coupling.hpp"

namespace tmfg {

std::string kernel_to_json(const FourierKernel& kernel) {
  nlohmann::ordered_json j;
  j["c0"] = kernel.c0();
  j["modes"] = nlohmann::ordered_json::array();
  const bool two_d = kernel.uses_second_axis();
  for (const KernelMode& mode : kernel.modes()) {
    nlohmann::ordered_json entry;
    entry["k"] = two_d ? nlohmann::ordered_json{mode.k[0], mode.k[1]} : nlohmann::ordered_json{mode.k[0]};
    entry["c"] = mode.c;
    j["modes"].push_back(entry);
  }
  return j.dump(2);
}

FourierKernel kernel_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("kernel JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("kernel JSON: top level must be an object");
  double c0 = 0.0;
  if (j.contains("c0")) {
    if (!j["c0"].is_number()) throw FormatError("kernel JSON: c0 must be a number");
    c0 = j["c0"].get<double>();
  }
  std::vector<KernelMode> modes;
  if (j.contains("modes")) {
    if (!j["modes"].is_array()) throw FormatError("kernel JSON: modes must be an array");
    for (const auto& entry : j["modes"]) {
      if (!entry.is_object() || !entry.contains("k") || !entry.contains("c"))
        throw FormatError("kernel JSON: every mode needs \"k\" and \"c\"");
      const auto& k = entry["k"];
      if (!k.is_array() || k.empty() || k.size() > 2)
        throw FormatError("kernel JSON: k must be an array of 1 or 2 integers");
      KernelMode mode;
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (!k[i].is_number_integer()) throw FormatError("kernel JSON: k components must be integers");
        mode.k[i] = k[i].get<int>();
      }
      if (!entry["c"].is_number()) throw FormatError("kernel JSON: c must be a number");
      mode.c = entry["c"].get<double>();
      modes.push_back(mode);
    }
  }
  try {
    return FourierKernel(c0, std::move(modes));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("kernel JSON: ") + e.what());
  }
}

FourierKernel read_kernel_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open kernel file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return kernel_from_json(buf.str());
}

}  // namespace tmfg
