#pragma once

#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace topokit {

// Dense square cost matrix, row-major.
struct CostMatrix {
  std::size_t n = 0;
  std::vector<double> c;

  CostMatrix() = default;
  CostMatrix(std::size_t size, double fill = 0.0) : n(size), c(size * size, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return c[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return c[i * n + j]; }
};

// Minimum-cost perfect matching on a square matrix by successive shortest
// augmenting paths with dual potentials (Hungarian / Jonker-Volgenant style),
// O(n^3). Returns row -> column. Ties are broken towards the lowest column
// index, so the result is deterministic.
inline std::vector<std::size_t> solve_assignment(const CostMatrix& cost) {
  const std::size_t n = cost.n;
  if (n == 0) return {};
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

  // 1-based internally; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      double delta = inf;
      std::size_t j1 = none;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 == none) throw std::invalid_argument("solve_assignment: non-finite costs");
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[row_of[j] - 1] = j - 1;
  return row_to_col;
}

// Maximum bipartite matching (Hopcroft-Karp). adj[u] lists the right-side
// vertices adjacent to left vertex u. Returns the matching size.
inline std::size_t hopcroft_karp(const std::vector<std::vector<std::size_t>>& adj, std::size_t n_right) {
  const std::size_t n_left = adj.size();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> match_l(n_left, none), match_r(n_right, none), dist(n_left);

  auto bfs = [&] {
    std::queue<std::size_t> q;
    bool found = false;
    for (std::size_t u = 0; u < n_left; ++u) {
      if (match_l[u] == none) {
        dist[u] = 0;
        q.push(u);
      } else {
        dist[u] = none;
      }
    }
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t w : adj[u]) {
        const std::size_t m = match_r[w];
        if (m == none) {
          found = true;
        } else if (dist[m] == none) {
          dist[m] = dist[u] + 1;
          q.push(m);
        }
      }
    }
    return found;
  };

  // Iterative DFS along the BFS layers.
  std::vector<std::size_t> it(n_left);
  auto dfs = [&](std::size_t root) {
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      if (it[u] == adj[u].size()) {
        dist[u] = none;
        stack.pop_back();
        continue;
      }
      const std::size_t w = adj[u][it[u]++];
      const std::size_t m = match_r[w];
      if (m == none) {
        // Augment along the stack.
        std::size_t right = w;
        for (std::size_t k = stack.size(); k-- > 0;) {
          const std::size_t left = stack[k];
          const std::size_t prev = match_l[left];
          match_l[left] = right;
          match_r[right] = left;
          right = prev;
        }
        return true;
      }
      if (dist[m] == dist[u] + 1) stack.push_back(m);
    }
    return false;
  };

  std::size_t size = 0;
  while (bfs()) {
    std::fill(it.begin(), it.end(), 0);
    for (std::size_t u = 0; u < n_left; ++u)
      if (match_l[u] == none && dfs(u)) ++size;
  }
  return size;
}

}  // namespace topokit
