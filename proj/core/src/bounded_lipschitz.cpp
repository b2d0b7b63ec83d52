// Bounded-Lipschitz distance between node-supported measures.
//
// For a fixed sup-norm budget s the linear program
//   max sum_j f_j w_j  s.t.  |f_j| <= s,  |f_i - f_j| <= (1 - s) h  (grid neighbours)
// is dual to an uncapacitated min-cost flow on the grid graph plus one ground node:
// grid edges cost (1 - s) h per unit, node <-> ground arcs cost s per unit, and node j
// supplies w_j. Its value v(s) = (1 - s) T + s A, where T = h * (grid flow) and A =
// (ground flow) of an optimal flow, is concave and piecewise linear in s. Every
// evaluation yields a supporting line, so the joint optimum over s is found exactly
// by cutting planes on [0, 1].

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "torusmfg/measures.hpp"

namespace tmfg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes) : graph_(nodes) {}

  // Undirected uncapacitated edge, one directed arc pair per orientation.
  void add_edge(int u, int v, double cost, bool ground) {
    add_arc(u, v, cost, ground);
    add_arc(v, u, cost, ground);
  }

  struct Result {
    double grid_flow = 0.0;    // sum of |flow| on grid edges
    double ground_flow = 0.0;  // sum of |flow| on ground arcs
  };

  // Successive shortest paths with Johnson potentials; supplies sum to ~0.
  Result solve(std::vector<double> excess) {
    const int n = static_cast<int>(graph_.size());
    double scale = 0.0;
    for (double e : excess) scale += std::abs(e);
    const double tol = 1e-15 * std::max(scale, 1e-300);
    std::vector<double> potential(n, 0.0);
    std::vector<double> dist(n);
    std::vector<int> prev_node(n);
    std::vector<int> prev_arc(n);
    std::vector<int> origin(n);
    using Item = std::pair<double, int>;

    for (int guard = 0; guard < 50 * n + 1000; ++guard) {
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      std::fill(dist.begin(), dist.end(), kInf);
      for (int v = 0; v < n; ++v) {
        if (excess[v] > tol) {
          dist[v] = 0.0;
          prev_node[v] = -1;
          origin[v] = v;
          heap.emplace(0.0, v);
        }
      }
      if (heap.empty()) break;

      int sink = -1;
      std::vector<char> done(n, 0);
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (done[u] || d > dist[u]) continue;
        done[u] = 1;
        if (excess[u] < -tol) {
          sink = u;
          break;
        }
        for (int a = 0; a < static_cast<int>(graph_[u].size()); ++a) {
          const Arc& arc = graph_[u][a];
          if (arc.cap <= tol) continue;
          const double reduced = std::max(0.0, arc.cost + potential[u] - potential[arc.to]);
          const double nd = d + reduced;
          if (nd < dist[arc.to]) {
            dist[arc.to] = nd;
            prev_node[arc.to] = u;
            prev_arc[arc.to] = a;
            origin[arc.to] = origin[u];
            heap.emplace(nd, arc.to);
          }
        }
      }
      if (sink < 0) break;  // leftover excess is rounding residue

      const double reach = dist[sink];
      for (int v = 0; v < n; ++v) potential[v] += std::min(dist[v], reach);

      double amount = std::min(excess[origin[sink]], -excess[sink]);
      for (int v = sink; prev_node[v] >= 0; v = prev_node[v])
        amount = std::min(amount, graph_[prev_node[v]][prev_arc[v]].cap);
      for (int v = sink; prev_node[v] >= 0; v = prev_node[v]) {
        Arc& arc = graph_[prev_node[v]][prev_arc[v]];
        arc.cap -= amount;
        graph_[arc.to][arc.rev].cap += amount;
      }
      excess[origin[sink]] -= amount;
      excess[sink] += amount;
    }

    Result r;
    for (const auto& arcs : graph_) {
      for (const Arc& arc : arcs) {
        if (!arc.original) continue;
        // Flow on an original arc equals the capacity of its residual twin.
        const double flow = graph_[arc.to][arc.rev].cap;
        (arc.ground ? r.ground_flow : r.grid_flow) += flow;
      }
    }
    return r;
  }

 private:
  struct Arc {
    int to;
    int rev;
    double cap;
    double cost;
    bool original;
    bool ground;
  };

  void add_arc(int u, int v, double cost, bool ground) {
    graph_[u].push_back({v, static_cast<int>(graph_[v].size()), kInf, cost, true, ground});
    graph_[v].push_back({u, static_cast<int>(graph_[u].size()) - 1, 0.0, -cost, false, ground});
  }

  std::vector<std::vector<Arc>> graph_;
};

struct Line {
  double transport;  // T
  double ground;     // A
  double at(double s) const { return (1.0 - s) * transport + s * ground; }
};

// Value and supporting line of the fixed-s problem.
Line evaluate(const TorusGrid& grid, const std::vector<double>& w, double s) {
  const int n = static_cast<int>(grid.size());
  const int ground = n;
  const double h = grid.spacing();
  MinCostFlow flow(n + 1);
  const int npa = grid.points_per_axis();
  for (int idx = 0; idx < n; ++idx) {
    if (grid.dim() == 1) {
      flow.add_edge(idx, (idx + 1) % npa, (1.0 - s) * h, false);
    } else {
      const int i = idx / npa;
      const int j = idx % npa;
      flow.add_edge(idx, static_cast<int>(grid.index(i + 1, j)), (1.0 - s) * h, false);
      flow.add_edge(idx, static_cast<int>(grid.index(i, j + 1)), (1.0 - s) * h, false);
    }
    flow.add_edge(idx, ground, s, true);
  }
  std::vector<double> excess(w);
  excess.push_back(0.0);
  const auto r = flow.solve(std::move(excess));
  return {h * r.grid_flow, r.ground_flow};
}

// argmax over [0, 1] of the lower envelope of the collected lines.
std::pair<double, double> envelope_max(const std::vector<Line>& lines) {
  std::vector<double> candidates{0.0, 1.0};
  for (std::size_t a = 0; a < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      const double sa = lines[a].ground - lines[a].transport;
      const double sb = lines[b].ground - lines[b].transport;
      if (sa == sb) continue;
      const double s = (lines[b].transport - lines[a].transport) / (sa - sb);
      if (s > 0.0 && s < 1.0) candidates.push_back(s);
    }
  }
  double best_s = 0.0;
  double best = -kInf;
  for (double s : candidates) {
    double env = kInf;
    for (const Line& l : lines) env = std::min(env, l.at(s));
    if (env > best) {
      best = env;
      best_s = s;
    }
  }
  return {best_s, best};
}

}  // namespace

double bounded_lipschitz_distance(const Density& m1, const Density& m2) {
  if (!(m1.grid() == m2.grid()))
    throw InvalidArgument("bounded_lipschitz_distance: densities live on different grids");
  const TorusGrid& grid = m1.grid();
  if (grid.size() > kBoundedLipschitzMaxNodes)
    throw InvalidArgument("bounded_lipschitz_distance: grid has " + std::to_string(grid.size()) +
                          " nodes, the LP is limited to " + std::to_string(kBoundedLipschitzMaxNodes) +
                          "; use wasserstein1_circle (d = 1) for larger grids");

  std::vector<double> w(grid.size());
  double total_variation = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = (m1[j] - m2[j]) * grid.cell_volume();
    total_variation += std::abs(w[j]);
  }
  if (total_variation == 0.0) return 0.0;

  // Everything through the ground node is always feasible: T = 0, A = ||w||_1.
  std::vector<Line> lines{{0.0, total_variation}};
  double best_value = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const auto [s, upper] = envelope_max(lines);
    const Line line = evaluate(grid, w, s);
    const double value = line.at(s);
    best_value = std::max(best_value, value);
    if (upper - best_value <= 1e-13 * (1.0 + upper)) break;
    lines.push_back(line);
  }
  return best_value;
}

}  // namespace tmfg
