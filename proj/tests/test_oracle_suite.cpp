#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "support/test_oracles.hpp"
#include "torusmfg/oracles.hpp"

namespace tmfg {
namespace {

using testing::quad;

TEST(TrigPolynomial, RandomSamplesArePositiveAndSeeded) {
  const TorusGrid g(1, 128);
  std::mt19937_64 a(42);
  std::mt19937_64 b(42);
  for (int s = 0; s < 50; ++s) {
    const TrigPolynomial p = random_positive_trig_polynomial(a, 8, 0.05, g);
    const TrigPolynomial q = random_positive_trig_polynomial(b, 8, 0.05, g);
    EXPECT_EQ(p.cos_coeffs, q.cos_coeffs);
    EXPECT_LE(p.degree(), 8);
    EXPECT_GE(p.degree(), 1);
    EXPECT_GE(p.margin(g), 0.05 - 1e-12);
    EXPECT_NEAR(p.sample(g)[5], p(g.node(5).x), 1e-14);
  }
}

TEST(LogInequality, ConstantIsZero) {
  const InequalityCheck r = torus_log_inequality_check(ScalarField(TorusGrid(1, 64), 2.5));
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.passes);
}

TEST(LogInequality, ExpCosineMatchesQuadrature) {
  const TorusGrid g(1, 128);
  const InequalityCheck r = torus_log_inequality_check(ScalarField::sample(g, [](double x) { return std::exp(std::cos(x)); }));
  const double lhs = quad([](double x) { return std::pow(std::sin(x), 2) * std::exp(std::cos(x)); });
  const double rhs = quad([](double x) { return std::pow(std::cos(x), 2) * std::exp(std::cos(x)); });
  EXPECT_NEAR(r.lhs, lhs, 1e-12);
  EXPECT_NEAR(r.rhs, rhs, 1e-12);
  EXPECT_NEAR(rhs - lhs, quad([](double x) { return std::cos(2 * x) * std::exp(std::cos(x)); }), 1e-12);
  EXPECT_TRUE(r.passes);
}

TEST(LogInequality, TwoHundredRandomPolynomials) {
  const TorusGrid g(1, 128);
  std::mt19937_64 rng(42);
  for (int s = 0; s < 200; ++s) {
    const TrigPolynomial p = random_positive_trig_polynomial(rng, 8, 0.05, g);
    const InequalityCheck r = torus_log_inequality_check(p.sample(g));
    EXPECT_TRUE(r.passes) << "sample " << s << ": " << r.lhs << " > " << r.rhs;
  }
}

TEST(LogInequality, RejectsNonPositiveInput) {
  ScalarField g(TorusGrid(1, 32), 1.0);
  g[4] = 0.0;
  EXPECT_THROW(torus_log_inequality_check(g), InvalidArgument);
  EXPECT_THROW(torus_log_inequality_check(ScalarField(TorusGrid(2, 8), 1.0)), InvalidArgument);
}

TEST(ModeBound, MEpsClosedForms) {
  const TorusGrid g(1, 128);
  const ModeBoundCheck a = fisher_mode_bound_check(m_eps_family(0.1, {1, 0}, g), {1, 0});
  EXPECT_NEAR(a.ratio, 0.02 / testing::fisher_m_eps_closed_form(0.1), 1e-9);
  EXPECT_NEAR(a.ratio, 0.98990, 1e-5);
  EXPECT_TRUE(a.passes);
  const ModeBoundCheck b = fisher_mode_bound_check(m_eps_family(0.01, {3, 0}, g), {3, 0});
  EXPECT_GE(b.ratio, 1 - 2e-4);
  EXPECT_LT(b.ratio, 1.0);
  EXPECT_THROW(fisher_mode_bound_check(Density::uniform(g), {1, 0}), InvalidArgument);
}

TEST(ModeBound, RandomDensities) {
  const TorusGrid g(1, 128);
  std::mt19937_64 rng(42);
  for (int s = 0; s < 100; ++s) {
    const Density m = random_positive_density(rng, 8, g);
    for (int k = 1; k <= 4; ++k) EXPECT_TRUE(fisher_mode_bound_check(m, {k, 0}).passes);
  }
}

TEST(Sharpness, ClosedFormValuesAndQuadrature) {
  EXPECT_NEAR(sharpness_ratio_closed_form(0.2), 0.9583, 1e-4);
  EXPECT_NEAR(sharpness_ratio_closed_form(0.1), 0.9899, 1e-4);
  EXPECT_NEAR(sharpness_ratio_closed_form(0.05), 0.9975, 1e-4);
  for (double eps : {0.2, 0.1, 0.05}) {
    const double fisher = quad([&](double x) {
      const double dm = -2 * eps * std::sin(x);
      return dm * dm / (1 + 2 * eps * std::cos(x)) / testing::kTwoPi;
    });
    EXPECT_NEAR(2 * eps * eps / fisher, sharpness_ratio_closed_form(eps), 1e-12);
  }
}

TEST(Sharpness, SweepMatchesClosedFormAndIsMonotone) {
  const TorusGrid g(1, 128);
  const std::vector<double> eps{0.2499, 0.2, 0.1, 0.05};
  const auto rows = sharpness_sweep({1, 0}, eps, g);
  ASSERT_EQ(rows.size(), eps.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(rows[i].ratio, rows[i].closed_form, 1e-3);
    if (i > 0) EXPECT_GT(rows[i].ratio, rows[i - 1].ratio);
  }
  EXPECT_GE(rows.back().ratio, 1 - 5 * 0.05 * 0.05);
  EXPECT_NEAR(sharpness_ratio_closed_form(0.25), 2 * 0.0625 / (1 - std::sqrt(1 - 4 * 0.0625 * 1.0)), 1e-15);
}

TEST(Sharpness, RatioIsWaveNumberIndependent) {
  const TorusGrid g(1, 128);
  const auto k1 = sharpness_sweep({1, 0}, {0.1, 0.05}, g);
  const auto k3 = sharpness_sweep({3, 0}, {0.1, 0.05}, g);
  for (std::size_t i = 0; i < k1.size(); ++i) EXPECT_NEAR(k1[i].ratio, k3[i].ratio, 1e-10);
}

TEST(HeatIdentity, DeBruijnAndFisherDecay) {
  const TorusGrid g(1, 128);
  std::mt19937_64 rng(42);
  for (int s = 0; s < 10; ++s) {
    const HeatIdentityCheck h = heat_identity_check(random_positive_density(rng, 8, g), 0.05 * (s + 1));
    EXPECT_TRUE(h.de_bruijn_passes) << h.dent_dt << " vs " << -h.fisher;
    EXPECT_TRUE(h.fisher_decay_passes) << h.dfisher_dt << " vs " << -2 * h.fisher;
  }
}

TEST(VerificationSuite, AllCasesPassAndReportsAreWritten) {
  VerificationOptions opt;
  opt.log_inequality_samples = 40;
  opt.mode_bound_samples = 20;
  const VerificationReport report = run_verification_suite(opt);
  EXPECT_EQ(report.cases.size(), 11u);
  for (const VerificationCase& c : report.cases) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_TRUE(report.all_passed());

  const auto path = std::filesystem::temp_directory_path() / "tmfg_verify.xml";
  write_junit_xml(path, report);
  std::ifstream in(path);
  std::stringstream xml;
  xml << in.rdbuf();
  EXPECT_NE(xml.str().find("<testsuite"), std::string::npos);
  EXPECT_NE(xml.str().find("failures=\"0\""), std::string::npos);
  EXPECT_NE(text_summary(report).find("11/11 checks passed"), std::string::npos);
}

TEST(VerificationSuite, IsReproducible) {
  VerificationOptions opt;
  opt.log_inequality_samples = 5;
  opt.mode_bound_samples = 5;
  opt.heat_identity_samples = 2;
  opt.heat_derivative_samples = 3;
  const VerificationReport a = run_verification_suite(opt);
  const VerificationReport b = run_verification_suite(opt);
  ASSERT_EQ(a.cases.size(), b.cases.size());
  for (std::size_t i = 0; i < a.cases.size(); ++i) EXPECT_EQ(a.cases[i].detail, b.cases[i].detail);
}

}  // namespace
}  // namespace tmfg
