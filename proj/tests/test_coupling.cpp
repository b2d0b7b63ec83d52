#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/test_oracles.hpp"
#include "torusmfg/coupling.hpp"
#include "torusmfg/oracles.hpp"

namespace tmfg {
namespace {

using testing::kTwoPi;
using testing::max_abs_diff;
using testing::quad;

TEST(FourierKernel, CanonicalizesAndValidates) {
  const FourierKernel k(0.5, {{{-2, 0}, 1.0}, {{1, 0}, -0.5}});
  ASSERT_EQ(k.modes().size(), 2u);
  EXPECT_EQ(k.modes()[0].k, (WaveVector{1, 0}));
  EXPECT_EQ(k.modes()[1].k, (WaveVector{2, 0}));
  EXPECT_THROW(FourierKernel(0.0, {{{0, 0}, 1.0}}), InvalidArgument);
  EXPECT_THROW(FourierKernel(0.0, {{{1, 0}, 1.0}, {{-1, 0}, 2.0}}), InvalidArgument);
  EXPECT_THROW(FourierKernel(0.0, {{{1, 0}, std::nan("")}}), InvalidArgument);
  EXPECT_THROW(FourierKernel::kuramoto(0.0), InvalidArgument);
  EXPECT_THROW(FourierKernel(0.0, {{{8, 0}, 1.0}}).require_resolved(TorusGrid(1, 16)), InvalidArgument);
  EXPECT_THROW(FourierKernel(0.0, {{{1, 1}, 1.0}}).require_resolved(TorusGrid(1, 16)), InvalidArgument);
}

TEST(FourierKernel, KuramotoEvaluatesSinSquared) {
  const FourierKernel k = FourierKernel::kuramoto(3.0);
  for (double x : {0.0, 0.4, 2.0, 5.5}) EXPECT_NEAR(k.evaluate(x), 3.0 * std::pow(std::sin(x / 2), 2), 1e-14);
}

TEST(InteractionCost, UniformGivesTwiceC0) {
  const TorusGrid g(1, 32);
  const FourierKernel k(0.7, {{{1, 0}, 0.3}, {{3, 0}, -1.2}});
  EXPECT_LT(max_abs_diff(interaction_cost(k, Density::uniform(g)), ScalarField(g, 1.4)), 1e-14);
}

TEST(InteractionCost, KuramotoMatchesBruteConvolution) {
  const TorusGrid g(1, 64);
  const double kappa = 2.5;
  const double eps = 0.15;
  const FourierKernel k = FourierKernel::kuramoto(kappa);
  const Density m = m_eps_family(eps, {1, 0}, g);
  const ScalarField f = interaction_cost(k, m);
  const ScalarField brute = testing::brute_interaction_cost([&](double z) { return k.evaluate(z); }, m);
  EXPECT_LT(max_abs_diff(f, brute), 1e-13);
  const auto closed = ScalarField::sample(g, [&](double x) { return kappa * (1 - eps * std::cos(x)); });
  EXPECT_LT(max_abs_diff(f, closed), 1e-13);
}

TEST(InteractionCost, SineProjectionDoublesTheMoment) {
  const TorusGrid g(1, 64);
  const FourierKernel k(0.0, {{{2, 0}, 1.0}});
  const Density m(ScalarField::sample(g, [](double x) { return (1 + 0.4 * std::sin(2 * x)) / kTwoPi; }));
  const auto expected = ScalarField::sample(g, [](double x) { return 0.4 * std::sin(2 * x); });
  EXPECT_LT(max_abs_diff(interaction_cost(k, m), expected), 1e-14);
}

TEST(InteractionCost, TwoDimensionalBruteConvolution) {
  const TorusGrid g(2, 16);
  const FourierKernel k(0.2, {{{1, 1}, 0.5}, {{0, 2}, -0.3}});
  const Density m = von_mises(1.0, g);
  const ScalarField f = interaction_cost(k, m);
  ScalarField brute(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      s += k.evaluate(g.node(i).x - g.node(j).x, g.node(i).y - g.node(j).y) * m[j];
    brute[i] = 2 * s * g.cell_volume();
  }
  EXPECT_LT(max_abs_diff(f, brute), 1e-13);
}

double potential_by_double_quadrature(const FourierKernel& k, double eps) {
  const auto m = [&](double x) { return (1 + 2 * eps * std::cos(x)) / kTwoPi; };
  return quad([&](double x) { return m(x) * quad([&](double y) { return k.evaluate(x - y) * m(y); }); });
}

TEST(PotentialEnergy, MatchesDoubleQuadrature) {
  const TorusGrid g(1, 64);
  EXPECT_NEAR(potential_energy(FourierKernel(0.8, {{{2, 0}, 1.0}}), Density::uniform(g)), 0.8, 1e-15);
  const FourierKernel cosine(0.0, {{{1, 0}, 1.7}});
  const double gamma_eps2 = potential_by_double_quadrature(cosine, 0.2);
  EXPECT_NEAR(gamma_eps2, 1.7 * 0.04, 1e-12);
  EXPECT_NEAR(potential_energy(cosine, m_eps_family(0.2, {1, 0}, g)), gamma_eps2, 1e-13);
  const FourierKernel kur = FourierKernel::kuramoto(2.0);
  const double oracle = potential_by_double_quadrature(kur, 0.1);
  EXPECT_NEAR(oracle, 0.99, 1e-12);
  EXPECT_NEAR(potential_energy(kur, m_eps_family(0.1, {1, 0}, g)), oracle, 1e-13);
}

TEST(FreeEnergy, Compositions) {
  const TorusGrid g(1, 128);
  const ModelParams unit{1.0, 1.0};
  EXPECT_NEAR(free_energy(FourierKernel::kuramoto(2.0), unit, Density::uniform(g)), 1 - std::log(kTwoPi), 1e-13);

  const double eps = 0.1;
  const auto me = [&](double x) { return (1 + 2 * eps * std::cos(x)) / kTwoPi; };
  const double ent = quad([&](double x) { return me(x) * std::log(me(x)); });
  const Density m = m_eps_family(eps, {1, 0}, g);
  EXPECT_NEAR(free_energy(FourierKernel(), unit, m), ent + 0.5 * testing::fisher_m_eps_closed_form(eps), 1e-9);

  const FreeEnergy a = free_energy_terms(FourierKernel(), {1.0, 1.0}, m);
  const FreeEnergy b = free_energy_terms(FourierKernel(), {1.0, 2.0}, m);
  EXPECT_NEAR(b.total - b.potential, 2 * entropy(m) + 4 * 0.5 * fisher_information(m), 1e-14);
  EXPECT_NEAR(a.total, a.entropy * 1.0 + 0.5 * a.fisher + a.potential, 1e-15);
  EXPECT_DOUBLE_EQ(b.entropy, a.entropy);
}

TEST(LinearDerivative, UniformIsConstant) {
  const TorusGrid g(1, 64);
  const ModelParams p{0.7, 1.3};
  const ScalarField d = linear_derivative_free_energy(FourierKernel::kuramoto(3.0), p, Density::uniform(g));
  EXPECT_LT(max_abs_diff(d, ScalarField(g, p.nu * p.rho * std::log(1 / kTwoPi) + 3.0)), 1e-12);
}

TEST(LinearDerivative, MEpsIsNotStationaryForTheTrivialGame) {
  const ScalarField d =
      linear_derivative_free_energy(FourierKernel(), {1.0, 1.0}, m_eps_family(0.1, {1, 0}, TorusGrid(1, 128)));
  EXPECT_GT(d.oscillation(), 0.01);
}

TEST(LinearDerivative, FirstVariationMatchesFiniteDifference) {
  std::mt19937_64 rng(21);
  const TorusGrid g(1, 128);
  const ModelParams p{0.8, 0.6};
  for (int s = 0; s < 5; ++s) {
    const FourierKernel k = random_kernel(rng, 3, 5);
    const Density m1 = random_positive_density(rng, 5, g);
    const Density m2 = random_positive_density(rng, 5, g);
    const ScalarField diff = m1.field() - m2.field();
    const double analytic = integrate(linear_derivative_free_energy(k, p, m2) * diff);
    const double tau = 1e-5;
    const auto phi = [&](double t) { return free_energy(k, p, Density::normalized(m2.field() + diff * t)); };
    const double numeric = (phi(tau) - phi(-tau)) / (2 * tau);
    EXPECT_NEAR(numeric, analytic, 1e-3 * std::abs(analytic));
  }
}

TEST(Criteria, LasryLionsMonotonicity) {
  EXPECT_FALSE(is_lasry_lions_monotone(FourierKernel::kuramoto(0.5)));
  EXPECT_TRUE(is_lasry_lions_monotone(FourierKernel(0.0, {{{1, 0}, 3.0}, {{2, 0}, 1.0}})));
  EXPECT_TRUE(is_lasry_lions_monotone(FourierKernel()));
}

TEST(Criteria, LambdaUpperBound) {
  EXPECT_DOUBLE_EQ(lambda_upper_bound(FourierKernel::kuramoto(3.0)), 1.5);
  EXPECT_DOUBLE_EQ(lambda_upper_bound(FourierKernel(0.0, {{{2, 0}, 0.9}})), 0.0);
  EXPECT_NEAR(lambda_upper_bound(FourierKernel(0.0, {{{1, 0}, -0.3}, {{2, 0}, 5.0}, {{3, 0}, -0.1}})), 0.4, 1e-15);
}

TEST(Criteria, CriticalCoupling) {
  EXPECT_DOUBLE_EQ(critical_coupling({1.0, 1.0}), 4.0);
  EXPECT_DOUBLE_EQ(critical_coupling({0.5, 1.0}), 3.0);
  const double sigma2 = 2.6;
  EXPECT_NEAR(critical_coupling({0.7, 1.3}), sigma2 * (0.7 + sigma2 / 2), 1e-14);
  EXPECT_NEAR(critical_coupling({0.7, 1.3}), 5.2, 1e-14);
  EXPECT_THROW(critical_coupling({0.0, 1.0}), InvalidArgument);
}

TEST(Criteria, HeatFlowCriterion) {
  const TorusGrid g(1, 128);
  const ModelParams unit{1.0, 1.0};
  const HeatFlowCriterion u = heat_flow_criterion(FourierKernel::kuramoto(2.0), unit, Density::uniform(g));
  EXPECT_NEAR(u.lhs, 0.0, 1e-15);
  EXPECT_NEAR(u.rhs, 0.0, 1e-15);
  EXPECT_TRUE(u.passes);

  const Density m = m_eps_family(0.1, {1, 0}, g);
  const double fisher = 2 * testing::fisher_m_eps_closed_form(0.1);
  const HeatFlowCriterion sub = heat_flow_criterion(FourierKernel::kuramoto(2.0), unit, m);
  EXPECT_NEAR(sub.lhs, 0.02, 1e-13);
  EXPECT_NEAR(sub.rhs, fisher, 1e-9);
  EXPECT_FALSE(sub.passes);
  const HeatFlowCriterion super = heat_flow_criterion(FourierKernel::kuramoto(6.0), unit, m);
  EXPECT_NEAR(super.lhs, 0.06, 1e-13);
  EXPECT_TRUE(super.passes);
}

TEST(HeatFlowDerivative, ClosedFormsAndModeDecay) {
  const TorusGrid g(1, 128);
  const HeatFlowDerivative u = heat_flow_derivative_check(FourierKernel::kuramoto(2.0), Density::uniform(g), 0.3);
  EXPECT_NEAR(u.analytic, 0.0, 1e-15);
  EXPECT_NEAR(u.numeric, 0.0, 1e-10);

  const HeatFlowDerivative d = heat_flow_derivative_check(FourierKernel::kuramoto(2.0), m_eps_family(0.2, {1, 0}, g), 0.0);
  EXPECT_NEAR(d.analytic, 0.08, 1e-13);
  EXPECT_NEAR(d.numeric, d.analytic, 1e-7 * (1 + d.analytic));

  const FourierKernel k(0.3, {{{1, 0}, -0.8}, {{3, 0}, 0.5}});
  const Density m = von_mises(1.5, g);
  const double t = 0.5;
  double decayed = 0.0;
  for (const KernelMode& mode : k.modes()) {
    const double k2 = mode.k[0] * mode.k[0];
    decayed -= 2 * mode.c * k2 * std::exp(-2 * k2 * t) * fourier_moment(m, mode.k).q;
  }
  const HeatFlowDerivative h = heat_flow_derivative_check(k, m, t);
  EXPECT_NEAR(h.analytic, decayed, 1e-14);
  EXPECT_NEAR(h.numeric, h.analytic, 1e-7 * (1 + std::abs(h.analytic)));
}

TEST(KernelJson, RoundTripAndErrors) {
  const FourierKernel k(0.25, {{{1, 0}, -0.5}, {{2, 1}, 0.125}});
  const FourierKernel back = kernel_from_json(kernel_to_json(k));
  EXPECT_EQ(back.c0(), k.c0());
  ASSERT_EQ(back.modes().size(), 2u);
  EXPECT_EQ(back.modes()[1].k, k.modes()[1].k);
  EXPECT_EQ(back.modes()[1].c, 0.125);
  const FourierKernel kur = kernel_from_json(kernel_to_json(FourierKernel::kuramoto(4.0)));
  EXPECT_EQ(kur.c0(), 2.0);
  EXPECT_EQ(kur.modes()[0].c, -2.0);
  EXPECT_THROW(kernel_from_json("{\"c0\": 1, \"modes\": [{\"k\": [1, 2, 3], \"c\": 1}]}"), FormatError);
  EXPECT_THROW(kernel_from_json("not json"), FormatError);
}

}  // namespace
}  // namespace tmfg
