#pragma once

// Independent reference computations used by the unit tests. None of them call
// into the library's spectral code.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "torusmfg/measures.hpp"

namespace tmfg::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Adaptive Gauss-Kronrod quadrature over [a, b].
template <class F>
double quad(F&& f, double a = 0.0, double b = kTwoPi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-15);
}

/// Max |f - g| over the nodes.
inline double max_abs_diff(const ScalarField& f, const ScalarField& g) { return (f - g).sup_norm(); }

/// Periodic trigonometric differentiation matrices on N equispaced nodes (N even).
/// The first-derivative matrix drops the Nyquist mode; the second includes it as -(N/2)^2.
inline Eigen::MatrixXd fourier_d1(int n) {
  const double h = kTwoPi / n;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) d(i, j) = 0.5 * ((i - j) % 2 == 0 ? 1.0 : -1.0) / std::tan((i - j) * h / 2.0);
  return d;
}

inline Eigen::MatrixXd fourier_d2(int n) {
  const double h = kTwoPi / n;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        d(i, j) = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
      } else {
        const double s = std::sin((i - j) * h / 2.0);
        d(i, j) = -0.5 * ((i - j) % 2 == 0 ? 1.0 : -1.0) / (s * s);
      }
    }
  return d;
}

inline Eigen::VectorXd to_vector(const ScalarField& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.data().data(), static_cast<Eigen::Index>(f.size()));
}

inline ScalarField to_field(const TorusGrid& grid, const Eigen::VectorXd& v) {
  return ScalarField(grid, std::vector<double>(v.data(), v.data() + v.size()));
}

/// Brute-force f(x_i) = 2 sum_j psi(x_i - x_j) m_j h on a 1-D grid.
template <class Psi>
ScalarField brute_interaction_cost(Psi&& psi, const Density& m) {
  const TorusGrid& g = m.grid();
  ScalarField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += psi(g.node(i).x - g.node(j).x) * m[j];
    out[i] = 2.0 * s * g.spacing();
  }
  return out;
}

/// Dense simplex with Bland's rule: maximize c.x subject to A x <= b, x >= 0, b >= 0.
inline double simplex_max(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if ((b.array() < 0.0).any()) throw std::invalid_argument("simplex_max: b must be nonnegative");
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
  t.col(n + m).head(m) = b;
  t.row(m).head(n) = -c.transpose();
  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = n + i;
  const double eps = 1e-12;
  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j)
      if (t(m, j) < -eps) {
        enter = j;
        break;
      }
    if (enter < 0) return t(m, n + m);
    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) > eps) {
        const double ratio = t(i, n + m) / t(i, enter);
        if (ratio < best - eps || (ratio <= best + eps && leave >= 0 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw std::runtime_error("simplex_max: unbounded");
    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i)
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    basis[leave] = enter;
  }
  throw std::runtime_error("simplex_max: iteration limit");
}

/// Bounded-Lipschitz distance from the primal LP over (g = f + s, s):
/// maximize sum_j g_j w_j h^d s.t. g_j <= 2 s, g_i - g_j + d_ij s <= d_ij on grid edges, s <= 1.
inline double bounded_lipschitz_lp(const Density& m1, const Density& m2) {
  const TorusGrid& g = m1.grid();
  const int n = g.points_per_axis();
  const auto nodes = static_cast<Eigen::Index>(g.size());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < (g.dim() == 2 ? n : 1); ++iy) {
      const auto i = static_cast<Eigen::Index>(g.index(ix, iy));
      const auto right = static_cast<Eigen::Index>(g.index(ix + 1, iy));
      edges.push_back({i, right});
      edges.push_back({right, i});
      if (g.dim() == 2) {
        const auto up = static_cast<Eigen::Index>(g.index(ix, iy + 1));
        edges.push_back({i, up});
        edges.push_back({up, i});
      }
    }
  const Eigen::Index vars = nodes + 1;
  const Eigen::Index rows = nodes + static_cast<Eigen::Index>(edges.size()) + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, vars);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(vars);
  const double h = g.spacing();
  for (Eigen::Index j = 0; j < nodes; ++j) {
    c(j) = (m1[j] - m2[j]) * g.cell_volume();
    a(j, j) = 1.0;
    a(j, nodes) = -2.0;
  }
  Eigen::Index r = nodes;
  for (const auto& [i, j] : edges) {
    a(r, i) = 1.0;
    a(r, j) = -1.0;
    a(r, nodes) = h;
    b(r) = h;
    ++r;
  }
  a(r, nodes) = 1.0;
  b(r) = 1.0;
  return simplex_max(c, a, b);
}

/// Brute-force circular W1 of node masses: min over c of h sum |G_j - c|, c scanned over the G_j.
inline double w1_brute(const Density& m1, const Density& m2) {
  const TorusGrid& g = m1.grid();
  std::vector<double> cdf(g.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    acc += (m1[j] - m2[j]) * g.spacing();
    cdf[j] = acc;
  }
  double best = std::numeric_limits<double>::infinity();
  for (double c : cdf) {
    double s = 0.0;
    for (double v : cdf) s += std::abs(v - c);
    best = std::min(best, s * g.spacing());
  }
  return best;
}

/// 1 - sqrt(1 - 4 eps^2), the Fisher information of m_eps at |k| = 1.
inline double fisher_m_eps_closed_form(double eps) { return 1.0 - std::sqrt(1.0 - 4.0 * eps * eps); }

}  // namespace tmfg::testing
