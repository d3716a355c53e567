#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>

#include "manyrrt/bench.hpp"

namespace manyrrt {

namespace {

struct Grid {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 0.0;
  double dy = 0.0;

  int id(int i, int j) const { return i * (ny + 1) + j; }
  int size() const { return (nx + 1) * (ny + 1); }
  JointConfig at(int k) const {
    JointConfig q(2);
    q << x0 + (k / (ny + 1)) * dx, y0 + (k % (ny + 1)) * dy;
    return q;
  }
  // Grid nodes at the corners of the cell containing q.
  std::vector<int> corners(const JointConfig& q) const {
    const int i = std::clamp(static_cast<int>(std::floor((q[0] - x0) / dx)), 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor((q[1] - y0) / dy)), 0, ny - 1);
    return {id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)};
  }
};

// Greedy shortcutting: from each kept waypoint jump to the farthest later
// one reachable by a free straight segment.
std::vector<JointConfig> shortcut(const std::vector<JointConfig>& w, const CollisionContext& ctx) {
  std::vector<JointConfig> out{w.front()};
  std::size_t i = 0;
  while (i + 1 < w.size()) {
    std::size_t j = w.size() - 1;
    while (j > i + 1 && !ctx.edge_free(w[i], w[j])) --j;
    out.push_back(w[j]);
    i = j;
  }
  return out;
}

}  // namespace

OracleResult grid_oracle_2dof(const CollisionContext& ctx, const JointConfig& start,
                              const std::vector<JointConfig>& goals, double resolution) {
  if (ctx.chain.dof() != 2) throw std::invalid_argument("grid_oracle_2dof needs a 2-joint chain");
  if (!(resolution > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  OracleResult result;
  if (goals.empty() || !ctx.is_free(start)) return result;

  // The step is the largest one not exceeding `resolution` that divides the box.
  Grid g;
  const auto lo = ctx.chain.lower();
  const auto hi = ctx.chain.upper();
  g.nx = std::max(1, static_cast<int>(std::ceil((hi[0] - lo[0]) / resolution - 1e-9)));
  g.ny = std::max(1, static_cast<int>(std::ceil((hi[1] - lo[1]) / resolution - 1e-9)));
  g.x0 = lo[0];
  g.y0 = lo[1];
  g.dx = (hi[0] - lo[0]) / g.nx;
  g.dy = (hi[1] - lo[1]) / g.ny;

  const int n = g.size();
  std::vector<char> free(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) free[static_cast<std::size_t>(k)] = ctx.is_free(g.at(k)) ? 1 : 0;

  std::vector<double> dist(static_cast<std::size_t>(n), kInfinity);
  std::vector<int> prev(static_cast<std::size_t>(n), -1);  // -1: reached from start
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  for (int c : g.corners(start)) {
    if (!free[static_cast<std::size_t>(c)]) continue;
    const JointConfig q = g.at(c);
    const double d = (q - start).norm();
    if (d < dist[static_cast<std::size_t>(c)] && ctx.edge_free(start, q)) {
      dist[static_cast<std::size_t>(c)] = d;
      open.push({d, c});
    }
  }

  const bool check_edges = std::hypot(g.dx, g.dy) > ctx.edge_resolution;
  while (!open.empty()) {
    const auto [d, k] = open.top();
    open.pop();
    if (d > dist[static_cast<std::size_t>(k)]) continue;
    const int i = k / (g.ny + 1);
    const int j = k % (g.ny + 1);
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (!di && !dj) continue;
        const int a = i + di;
        const int b = j + dj;
        if (a < 0 || b < 0 || a > g.nx || b > g.ny) continue;
        const int m = g.id(a, b);
        if (!free[static_cast<std::size_t>(m)]) continue;
        const double nd = d + std::hypot(di * g.dx, dj * g.dy);
        if (nd >= dist[static_cast<std::size_t>(m)]) continue;
        if (check_edges && !ctx.edge_free(g.at(k), g.at(m))) continue;
        dist[static_cast<std::size_t>(m)] = nd;
        prev[static_cast<std::size_t>(m)] = k;
        open.push({nd, m});
      }
    }
  }

  int best_corner = -2;  // -1 means the direct start-goal segment
  for (std::size_t gi = 0; gi < goals.size(); ++gi) {
    const JointConfig& goal = goals[gi];
    if (goal.size() != 2 || !ctx.is_free(goal)) continue;
    const double direct = (goal - start).norm();
    if (direct < result.cost && ctx.edge_free(start, goal)) {
      result.cost = direct;
      result.goal_index = static_cast<int>(gi);
      best_corner = -1;
    }
    for (int c : g.corners(goal)) {
      const double via = dist[static_cast<std::size_t>(c)] + (g.at(c) - goal).norm();
      if (via < result.cost && ctx.edge_free(g.at(c), goal)) {
        result.cost = via;
        result.goal_index = static_cast<int>(gi);
        best_corner = c;
      }
    }
  }
  if (result.goal_index < 0) return result;

  std::vector<JointConfig> w{goals[static_cast<std::size_t>(result.goal_index)]};
  for (int k = best_corner; k >= 0; k = prev[static_cast<std::size_t>(k)]) w.push_back(g.at(k));
  w.push_back(start);
  std::reverse(w.begin(), w.end());
  result.path.waypoints = shortcut(w, ctx);
  result.path.cost = path_cost(result.path.waypoints);
  result.cost = std::min(result.cost, result.path.cost);
  return result;
}

}  // namespace manyrrt
