#include <cmath>

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include "support/test_oracles.hpp"
#include "torusmfg/stationary.hpp"

namespace tmfg {
namespace {

using testing::kTwoPi;
using testing::max_abs_diff;

const ModelParams kUnit{1.0, 1.0};

double hjb_residual(const ScalarField& u, const ScalarField& f, const ModelParams& p) {
  return (u * p.rho - laplacian(u) * p.nu + gradient(u).squared_norm() * 0.5 - f).sup_norm();
}

TEST(StationaryHjb, TrivialSources) {
  const TorusGrid g(1, 64);
  EXPECT_LT(solve_stationary_hjb(ScalarField(g), kUnit, ScalarField(g), 100, 1e-12).sup_norm(), 1e-14);
  const ModelParams p{0.7, 1.0};
  const ScalarField u = solve_stationary_hjb(ScalarField(g, 0.7 * 2.5), p, ScalarField(g), 100, 1e-12);
  EXPECT_LT(max_abs_diff(u, ScalarField(g, 2.5)), 1e-12);
}

TEST(StationaryHjb, SmallCosineSourceMatchesLinearization) {
  const TorusGrid g(1, 128);
  const auto f = ScalarField::sample(g, [](double x) { return 0.1 * std::cos(x); });
  const ScalarField u = solve_stationary_hjb(f, kUnit, ScalarField(g), 500, 1e-11);
  EXPECT_LE(hjb_residual(u, f, kUnit), 1e-10);
  const auto linear = ScalarField::sample(g, [](double x) { return 0.05 * std::cos(x); });
  EXPECT_LT(max_abs_diff(u, linear), 2.5e-3);
}

TEST(StationaryHjb, ResidualAgainstDenseMatrices) {
  const TorusGrid g(1, 32);
  const ModelParams p{0.6, 0.9};
  const auto f = ScalarField::sample(g, [](double x) { return 0.8 * std::sin(2 * x) + 0.3 * std::cos(x); });
  const ScalarField u = solve_stationary_hjb(f, p, ScalarField(g), 500, 1e-12);
  const Eigen::VectorXd uv = testing::to_vector(u);
  const Eigen::VectorXd du = testing::fourier_d1(32) * uv;
  const Eigen::VectorXd res = p.rho * uv - p.nu * (testing::fourier_d2(32) * uv) +
                              0.5 * du.cwiseProduct(du) - testing::to_vector(f);
  EXPECT_LT(res.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(StationaryHjb, ReportsNonConvergence) {
  const TorusGrid g(1, 64);
  const auto f = ScalarField::sample(g, [](double x) { return 5.0 * std::cos(x); });
  try {
    solve_stationary_hjb(f, kUnit, ScalarField(g), 2, 1e-14, 0);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 2);
    EXPECT_GT(e.last_residual(), 1e-14);
  }
}

TEST(GibbsDensity, ConstantGivesUniform) {
  const TorusGrid g(1, 32);
  EXPECT_LT(max_abs_diff(gibbs_density(ScalarField(g, 4.2), 0.5).field(), Density::uniform(g).field()), 1e-15);
}

TEST(GibbsDensity, CosineMatchesBesselNormalization) {
  const TorusGrid g(1, 128);
  const double z = testing::quad([](double x) { return std::exp(-std::cos(x)); });
  const double i0 = boost::math::cyl_bessel_i(0, 1.0);
  EXPECT_NEAR(i0, 1.266066, 1e-6);
  EXPECT_NEAR(z, kTwoPi * i0, 1e-13);
  const Density m = gibbs_density(ScalarField::sample(g, [](double x) { return std::cos(x); }), 1.0);
  const auto expected = ScalarField::sample(g, [&](double x) { return std::exp(-std::cos(x)) / z; });
  EXPECT_LT(max_abs_diff(m.field(), expected), 1e-14);
  EXPECT_NEAR(integrate(m.field()), 1.0, 1e-14);
}

TEST(GibbsDensity, GaugeInvariant) {
  const TorusGrid g(1, 64);
  const auto u = ScalarField::sample(g, [](double x) { return std::sin(x) + 0.3 * std::cos(3 * x); });
  EXPECT_LT(max_abs_diff(gibbs_density(u, 0.8).field(), gibbs_density(u + 17.3, 0.8).field()), 1e-14);
}

TEST(StationarityResidual, TrivialPairs) {
  const TorusGrid g(1, 64);
  const StationaryResidual zero = stationarity_residual(ScalarField(g), Density::uniform(g), FourierKernel(), kUnit);
  EXPECT_LE(zero.r_hjb, 1e-12);
  EXPECT_LE(zero.r_fp, 1e-12);
  EXPECT_LE(zero.r_const, 1e-12);
  const double kappa = 3.0;
  const ModelParams p{0.5, 1.0};
  const StationaryResidual kur =
      stationarity_residual(ScalarField(g, kappa / p.rho), Density::uniform(g), FourierKernel::kuramoto(kappa), p);
  EXPECT_LE(kur.r_hjb, 1e-12);
  EXPECT_LE(kur.r_fp, 1e-12);
}

TEST(StationarityResidual, PerturbedValueBreaksFokkerPlanck) {
  const TorusGrid g(1, 64);
  const auto u = ScalarField::sample(g, [](double x) { return 0.01 * std::cos(x); });
  const StationaryResidual r = stationarity_residual(u, Density::uniform(g), FourierKernel(), kUnit);
  EXPECT_GE(r.r_fp, 0.01 / kTwoPi * (1 - 1e-3));
  EXPECT_GT(r.r_fp, 1e-4);
}

TEST(StationarityResidual, LargeFreeEnergyOscillationIsNeverStationary) {
  const TorusGrid g(1, 128);
  for (double kappa : {2.0, 6.0}) {
    const FourierKernel k = FourierKernel::kuramoto(kappa);
    for (double eps : {0.15, 0.2}) {
      const Density m = m_eps_family(eps, {1, 0}, g);
      const ScalarField u = solve_stationary_hjb(interaction_cost(k, m), kUnit, ScalarField(g), 500, 1e-12);
      const StationaryResidual r = stationarity_residual(u, m, k, kUnit);
      ASSERT_GT(r.r_const, 0.1);
      EXPECT_GT(std::max(r.r_hjb, r.r_fp), 1e-6);
    }
  }
}

TEST(StationaryMfg, ZeroKernelGivesUniform) {
  const TorusGrid g(1, 64);
  const StationaryRun run = solve_stationary_mfg(FourierKernel(), kUnit, {}, default_seed_library(g));
  EXPECT_TRUE(run.all_converged());
  ASSERT_EQ(run.solutions.size(), 1u);
  EXPECT_LT(wasserstein1_circle(run.solutions[0].m, Density::uniform(g)), 1e-10);
}

TEST(StationaryMfg, SubcriticalKuramotoIsUniform) {
  const TorusGrid g(1, 128);
  const StationaryRun run = solve_stationary_mfg(FourierKernel::kuramoto(2.0), kUnit, {}, default_seed_library(g));
  ASSERT_TRUE(run.all_converged());
  for (const SeedRun& s : run.seeds) EXPECT_LE(wasserstein1_circle(s.solution.m, Density::uniform(g)), 1e-8);
  ASSERT_EQ(run.solutions.size(), 1u);
}

TEST(StationaryMfg, SupercriticalKuramotoHasSynchronizedSolution) {
  const TorusGrid g(1, 128);
  const StationaryConfig cfg;
  const StationaryRun run = solve_stationary_mfg(FourierKernel::kuramoto(6.0), kUnit, cfg, default_seed_library(g));
  ASSERT_TRUE(run.all_converged());
  ASSERT_GE(run.solutions.size(), 2u);
  bool uniform = false;
  bool synchronized = false;
  for (const StationarySolution& s : run.solutions) {
    const double q1 = fourier_moment(s.m, {1, 0}).q;
    uniform = uniform || q1 < 1e-12;
    if (q1 > 0.01) {
      synchronized = true;
      EXPECT_LE(s.residual_hjb, cfg.tol_pde);
      EXPECT_LE(s.residual_fp, cfg.tol_pde);
      EXPECT_LE(s.residual_const, 10 * cfg.tol_pde);
      EXPECT_LE(max_abs_diff(s.m.field(), gibbs_density(s.u, 1.0).field()), 10 * cfg.tol_pde);
    }
  }
  EXPECT_TRUE(uniform);
  EXPECT_TRUE(synchronized);
}

TEST(StationaryMfg, MonotoneKernelIsUnique) {
  const TorusGrid g(1, 128);
  const FourierKernel k(0.0, {{{1, 0}, 3.0}, {{2, 0}, 1.0}});
  const StationaryRun run = solve_stationary_mfg(k, kUnit, {}, default_seed_library(g));
  EXPECT_TRUE(run.all_converged());
  EXPECT_GE(run.seeds.size(), 5u);
  EXPECT_EQ(run.solutions.size(), 1u);
}

TEST(StationaryMfg, TranslationEquivariance) {
  const TorusGrid g(1, 128);
  const FourierKernel k = FourierKernel::kuramoto(6.0);
  const Density seed = m_eps_family(0.2, {1, 0}, g);
  const int shift = 13;
  const Density shifted(circular_shift(seed.field(), {shift, 0}));
  const StationaryRun a = solve_stationary_mfg(k, kUnit, {}, {{"base", seed}});
  const StationaryRun b = solve_stationary_mfg(k, kUnit, {}, {{"shifted", shifted}});
  ASSERT_TRUE(a.all_converged() && b.all_converged());
  const Density moved(circular_shift(a.seeds[0].solution.m.field(), {shift, 0}));
  EXPECT_LE(wasserstein1_circle(moved, b.seeds[0].solution.m), 1e-8);
}

TEST(StationaryMfg, ParallelSeedsAreDeterministic) {
  const TorusGrid g(1, 64);
  StationaryConfig serial;
  StationaryConfig parallel;
  parallel.jobs = 3;
  const auto seeds = default_seed_library(g);
  const StationaryRun a = solve_stationary_mfg(FourierKernel::kuramoto(5.0), kUnit, serial, seeds);
  const StationaryRun b = solve_stationary_mfg(FourierKernel::kuramoto(5.0), kUnit, parallel, seeds);
  ASSERT_EQ(a.seeds.size(), b.seeds.size());
  for (std::size_t i = 0; i < a.seeds.size(); ++i) {
    EXPECT_EQ(a.seeds[i].solution.m.field().data(), b.seeds[i].solution.m.field().data());
    EXPECT_EQ(a.seeds[i].history.size(), b.seeds[i].history.size());
  }
}

TEST(StationaryMfg, ShiftInvariantDistanceAndDedup) {
  const TorusGrid g(1, 64);
  const Density a = von_mises(2.0, g);
  const Density b = von_mises(2.0, g, 5 * g.spacing());
  EXPECT_LT(shift_invariant_distance(a, b), 1e-12);
  EXPECT_GT(density_distance(a, b), 0.1);
  StationarySolution sa{"a", ScalarField(g), a, 0, 0, 0, 1, true, ""};
  StationarySolution sb{"b", ScalarField(g), b, 0, 0, 0, 1, true, ""};
  StationarySolution su{"u", ScalarField(g), Density::uniform(g), 0, 0, 0, 1, true, ""};
  EXPECT_EQ(deduplicate({sa, sb, su}, 1e-6).size(), 2u);
}

TEST(StationaryConfig, Validation) {
  StationaryConfig c;
  EXPECT_NO_THROW(c.validate());
  c.damping = 1.5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.tol_pde = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

}  // namespace
}  // namespace tmfg
