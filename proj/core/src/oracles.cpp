#include "torusmfg/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "torusmfg/field_io.hpp"

namespace tmfg {

double TrigPolynomial::operator()(double x) const {
  double v = cos_coeffs.empty() ? 0.0 : cos_coeffs[0];
  for (int j = 1; j <= degree(); ++j) v += cos_coeffs[j] * std::cos(j * x) + sin_coeffs[j] * std::sin(j * x);
  return v;
}

ScalarField TrigPolynomial::sample(const TorusGrid& grid) const {
  if (grid.dim() != 1) throw InvalidArgument("TrigPolynomial::sample: 1-D grids only");
  if (degree() >= grid.nyquist()) throw InvalidArgument("TrigPolynomial::sample: degree not below Nyquist");
  return ScalarField::sample(grid, [this](double x) { return (*this)(x); });
}

double TrigPolynomial::margin(const TorusGrid& grid) const { return sample(grid).min(); }

TrigPolynomial random_positive_trig_polynomial(std::mt19937_64& rng, int max_degree, double min_margin,
                                               const TorusGrid& grid) {
  if (max_degree < 1) throw InvalidArgument("random_positive_trig_polynomial: max_degree must be >= 1");
  if (!(min_margin > 0.0)) throw InvalidArgument("random_positive_trig_polynomial: margin must be positive");
  std::uniform_int_distribution<int> pick_degree(1, max_degree);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int degree = pick_degree(rng);
  TrigPolynomial p;
  p.cos_coeffs.assign(degree + 1, 0.0);
  p.sin_coeffs.assign(degree + 1, 0.0);
  for (int j = 1; j <= degree; ++j) {
    const double scale = std::ldexp(1.0, -j);
    p.cos_coeffs[j] = scale * unit(rng);
    p.sin_coeffs[j] = scale * unit(rng);
  }
  const double lowest = p.margin(grid);
  p.cos_coeffs[0] = 1.05 * std::max(0.0, -lowest) + min_margin;
  return p;
}

Density random_positive_density(std::mt19937_64& rng, int max_degree, const TorusGrid& grid) {
  return Density::normalized(random_positive_trig_polynomial(rng, max_degree, 0.05, grid).sample(grid));
}

FourierKernel random_kernel(std::mt19937_64& rng, int max_modes, int max_k) {
  if (max_modes < 1 || max_k < max_modes) throw InvalidArgument("random_kernel: need 1 <= max_modes <= max_k");
  std::uniform_int_distribution<int> pick_count(1, max_modes);
  std::uniform_int_distribution<int> pick_k(1, max_k);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_real_distribution<double> constant(-1.0, 1.0);
  const int count = pick_count(rng);
  std::set<int> used;
  std::vector<KernelMode> modes;
  while (static_cast<int>(modes.size()) < count) {
    const int k = pick_k(rng);
    if (!used.insert(k).second) continue;
    modes.push_back({{k, 0}, coeff(rng)});
  }
  return FourierKernel(constant(rng), std::move(modes));
}

InequalityCheck torus_log_inequality_check(const ScalarField& g) {
  if (g.grid().dim() != 1) throw InvalidArgument("torus_log_inequality_check: d = 1 only");
  if (!g.all_finite() || !(g.min() > 0.0))
    throw InvalidArgument("torus_log_inequality_check: g must be finite and strictly positive");
  const ScalarField log_g = g.map([](double v) { return std::log(v); });
  const ScalarField first = partial(log_g, 0);
  const ScalarField second = laplacian(log_g);
  InequalityCheck r;
  r.lhs = integrate(first * first * g);
  r.rhs = integrate(second * second * g);
  r.passes = r.lhs <= r.rhs + 1e-9 * (1.0 + r.rhs);
  return r;
}

ModeBoundCheck fisher_mode_bound_check(const Density& m, const WaveVector& k) {
  const double fisher = fisher_information(m);
  if (!(fisher > 1e-300)) throw InvalidArgument("fisher_mode_bound_check: density is uniform (I = 0)");
  const FourierMoment mo = fourier_moment(m, k);
  const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1];
  ModeBoundCheck r;
  r.ratio = 2.0 * k2 * mo.q / fisher;
  r.passes = r.ratio <= 1.0 + 1e-8;
  return r;
}

double sharpness_ratio_closed_form(double eps) {
  if (!(eps > 0.0 && eps <= 0.5)) throw InvalidArgument("sharpness_ratio_closed_form: eps must lie in (0, 1/2]");
  return 2.0 * eps * eps / (1.0 - std::sqrt(1.0 - 4.0 * eps * eps));
}

std::vector<SharpnessRow> sharpness_sweep(const WaveVector& k, const std::vector<double>& eps_list,
                                          const TorusGrid& grid) {
  std::vector<SharpnessRow> rows;
  for (double eps : eps_list) {
    const Density m = m_eps_family(eps, k, grid);
    rows.push_back({eps, fisher_mode_bound_check(m, k).ratio, sharpness_ratio_closed_form(eps)});
  }
  return rows;
}

HeatIdentityCheck heat_identity_check(const Density& m, double t, double tau) {
  if (!(t >= 0.0) || !(tau > 0.0)) throw InvalidArgument("heat_identity_check: need t >= 0 and tau > 0");
  const auto at = [&m](double s) {
    return Density::normalized(
        apply_radial_multiplier(m.field(), [s](double k2) { return std::exp(-k2 * s); }));
  };
  const Density before = at(t - tau);
  const Density now = at(t);
  const Density after = at(t + tau);
  HeatIdentityCheck r;
  r.dent_dt = (entropy(after) - entropy(before)) / (2.0 * tau);
  r.fisher = fisher_information(now);
  r.dfisher_dt = (fisher_information(after) - fisher_information(before)) / (2.0 * tau);
  r.de_bruijn_passes = std::abs(r.dent_dt + r.fisher) <= 1e-6 * r.fisher;
  r.fisher_decay_passes = r.dfisher_dt <= -2.0 * r.fisher + 1e-8;
  return r;
}

// ---------------------------------------------------------------------------
// Verification suite

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

class Suite {
 public:
  explicit Suite(const VerificationOptions& opt) : opt_(opt) {}

  void run(const std::string& name, const std::function<std::string(bool&)>& body) {
    VerificationCase c;
    c.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      bool ok = true;
      c.detail = body(ok);
      c.passed = ok;
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report_.cases.push_back(std::move(c));
  }

  // Writes the offending sample so a failure can be reproduced outside the suite.
  void keep_artifact(const std::string& name, const ScalarField& f) const {
    if (opt_.artifact_dir.empty()) return;
    std::filesystem::create_directories(opt_.artifact_dir);
    write_field(opt_.artifact_dir / (name + ".tgf"), f);
  }

  VerificationReport take() { return std::move(report_); }

 private:
  const VerificationOptions& opt_;
  VerificationReport report_;
};

}  // namespace

bool VerificationReport::all_passed() const {
  return std::all_of(cases.begin(), cases.end(), [](const VerificationCase& c) { return c.passed; });
}

VerificationReport run_verification_suite(const VerificationOptions& opt) {
  const TorusGrid grid(1, opt.points_per_axis);
  Suite suite(opt);
  std::mt19937_64 rng(opt.seed);

  suite.run("log_inequality.constant", [&](bool& ok) {
    const InequalityCheck r = torus_log_inequality_check(ScalarField(grid, 2.5));
    ok = r.passes && r.lhs == 0.0 && r.rhs == 0.0;
    return fmt("lhs=%.3e rhs=%.3e", r.lhs, r.rhs);
  });

  suite.run("log_inequality.exp_cos", [&](bool& ok) {
    const InequalityCheck r =
        torus_log_inequality_check(ScalarField::sample(grid, [](double x) { return std::exp(std::cos(x)); }));
    ok = r.passes;
    return fmt("lhs=%.12g rhs=%.12g", r.lhs, r.rhs);
  });

  suite.run("log_inequality.random", [&](bool& ok) {
    int failures = 0;
    double worst = -1e300;
    for (int i = 0; i < opt.log_inequality_samples; ++i) {
      const ScalarField g = random_positive_trig_polynomial(rng, 8, 0.05, grid).sample(grid);
      const InequalityCheck r = torus_log_inequality_check(g);
      worst = std::max(worst, r.lhs - r.rhs);
      if (!r.passes) {
        ++failures;
        suite.keep_artifact("log_inequality_" + std::to_string(i), g);
      }
    }
    ok = failures == 0;
    return fmt("%g samples, %g failures, max(lhs - rhs)=%.3e", opt.log_inequality_samples, failures, worst);
  });

  suite.run("mode_bound.m_eps_0.1_k1", [&](bool& ok) {
    const ModeBoundCheck r = fisher_mode_bound_check(m_eps_family(0.1, {1, 0}, grid), {1, 0});
    ok = r.passes && std::abs(r.ratio - sharpness_ratio_closed_form(0.1)) <= 1e-9;
    return fmt("ratio=%.12f closed form=%.12f", r.ratio, sharpness_ratio_closed_form(0.1));
  });

  suite.run("mode_bound.m_eps_0.01_k3", [&](bool& ok) {
    const ModeBoundCheck r = fisher_mode_bound_check(m_eps_family(0.01, {3, 0}, grid), {3, 0});
    ok = r.passes && r.ratio >= 1.0 - 2e-4 && r.ratio < 1.0;
    return fmt("ratio=%.12f", r.ratio);
  });

  suite.run("mode_bound.random", [&](bool& ok) {
    int failures = 0;
    double worst = 0.0;
    for (int i = 0; i < opt.mode_bound_samples; ++i) {
      const Density m = random_positive_density(rng, 8, grid);
      bool sample_ok = true;
      for (int k = 1; k <= grid.nyquist() / 2; ++k) {
        const ModeBoundCheck r = fisher_mode_bound_check(m, {k, 0});
        worst = std::max(worst, r.ratio);
        sample_ok = sample_ok && r.passes;
      }
      if (!sample_ok) {
        ++failures;
        suite.keep_artifact("mode_bound_" + std::to_string(i), m.field());
      }
    }
    ok = failures == 0;
    return fmt("%g densities, %g failures, max ratio=%.9f", opt.mode_bound_samples, failures, worst);
  });

  suite.run("sharpness.sweep", [&](bool& ok) {
    const std::vector<double> eps{0.2, 0.1, 0.05};
    const std::vector<SharpnessRow> rows = sharpness_sweep({1, 0}, eps, grid);
    const double expected[] = {0.9583, 0.9899, 0.9975};
    std::string detail;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ok = ok && std::abs(rows[i].ratio - rows[i].closed_form) <= 1e-9 &&
           std::abs(rows[i].ratio - expected[i]) <= 1e-3;
      if (i > 0) ok = ok && rows[i].ratio > rows[i - 1].ratio;
      detail += fmt("eps=%.2f ratio=%.6f; ", rows[i].eps, rows[i].ratio);
    }
    ok = ok && rows.back().ratio >= 1.0 - 5.0 * eps.back() * eps.back();
    return detail;
  });

  suite.run("sharpness.k_independence", [&](bool& ok) {
    double spread = 0.0;
    const double base = sharpness_sweep({1, 0}, {0.1}, grid).front().ratio;
    for (int k = 2; k <= 5; ++k)
      spread = std::max(spread, std::abs(sharpness_sweep({k, 0}, {0.1}, grid).front().ratio - base));
    ok = spread <= 1e-9;
    return fmt("max |ratio(k) - ratio(1)| = %.3e", spread);
  });

  suite.run("closed_forms.m_eps", [&](bool& ok) {
    double worst_q = 0.0;
    double worst_i = 0.0;
    for (double eps : {0.2, 0.1, 0.05, 0.01}) {
      for (int k = 1; k <= 3; ++k) {
        const Density m = m_eps_family(eps, {k, 0}, grid);
        worst_q = std::max(worst_q, std::abs(fourier_moment(m, {k, 0}).q - eps * eps));
        const double closed = k * k * (1.0 - std::sqrt(1.0 - 4.0 * eps * eps));
        worst_i = std::max(worst_i, std::abs(fisher_information(m) - closed));
      }
    }
    ok = worst_q <= 1e-12 && worst_i <= 1e-8;
    return fmt("max |q - eps^2| = %.3e, max |I - closed form| = %.3e", worst_q, worst_i);
  });

  suite.run("heat.de_bruijn_and_fisher_decay", [&](bool& ok) {
    int failures = 0;
    double worst_rel = 0.0;
    double worst_decay = -1e300;
    for (int i = 0; i < opt.heat_identity_samples; ++i) {
      const Density m = random_positive_density(rng, 8, grid);
      bool sample_ok = true;
      for (double t : {0.0, 0.05, 0.3}) {
        const HeatIdentityCheck r = heat_identity_check(m, t);
        worst_rel = std::max(worst_rel, std::abs(r.dent_dt + r.fisher) / r.fisher);
        worst_decay = std::max(worst_decay, r.dfisher_dt + 2.0 * r.fisher);
        sample_ok = sample_ok && r.de_bruijn_passes && r.fisher_decay_passes;
      }
      if (!sample_ok) {
        ++failures;
        suite.keep_artifact("heat_identity_" + std::to_string(i), m.field());
      }
    }
    ok = failures == 0;
    return fmt("max |dEnt/dt + I| / I = %.3e, max (dI/dt + 2I) = %.3e, failures %g", worst_rel, worst_decay,
               failures);
  });

  suite.run("heat.derivative_identity", [&](bool& ok) {
    std::uniform_real_distribution<double> pick_t(0.0, 1.0);
    int failures = 0;
    double worst = 0.0;
    for (int i = 0; i < opt.heat_derivative_samples; ++i) {
      const FourierKernel kernel = random_kernel(rng, 4, 6);
      const Density m = random_positive_density(rng, 8, grid);
      const double t = pick_t(rng);
      const HeatFlowDerivative r = heat_flow_derivative_check(kernel, m, t);
      const double err = std::abs(r.analytic - r.numeric) / (1.0 + std::abs(r.analytic));
      worst = std::max(worst, err);
      if (err > 1e-7) {
        ++failures;
        suite.keep_artifact("heat_derivative_" + std::to_string(i), m.field());
      }
    }
    ok = failures == 0;
    return fmt("max |analytic - numeric| / (1 + |analytic|) = %.3e, failures %g", worst, failures);
  });

  return suite.take();
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_junit_xml(const std::filesystem::path& path, const VerificationReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  int failures = 0;
  double total = 0.0;
  for (const VerificationCase& c : report.cases) {
    failures += c.passed ? 0 : 1;
    total += c.seconds;
  }
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<testsuite name=\"torusmfg.verify\" tests=\"" << report.cases.size() << "\" failures=\"" << failures
      << "\" time=\"" << fmt("%.3f", total) << "\">\n";
  for (const VerificationCase& c : report.cases) {
    out << "  <testcase classname=\"torusmfg.verify\" name=\"" << xml_escape(c.name) << "\" time=\""
        << fmt("%.3f", c.seconds) << "\">\n";
    if (!c.passed) out << "    <failure message=\"" << xml_escape(c.detail) << "\"/>\n";
    out << "    <system-out>" << xml_escape(c.detail) << "</system-out>\n";
    out << "  </testcase>\n";
  }
  out << "</testsuite>\n";
}

std::string text_summary(const VerificationReport& report) {
  std::ostringstream out;
  int passed = 0;
  for (const VerificationCase& c : report.cases) {
    passed += c.passed ? 1 : 0;
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  out << passed << "/" << report.cases.size() << " checks passed\n";
  return out.str();
}

}  // namespace tmfg
