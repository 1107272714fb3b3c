#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topokit/assignment.hpp"
#include "topokit/errors.hpp"
#include "topokit/persistence.hpp"

namespace topokit {

// Ground metric between two diagram points. With LInf the distance from
// (b, d) to the diagonal is (d - b) / 2; with L2 it is (d - b) / sqrt(2).
enum class GroundMetric { LInf, L2 };

// Above this many augmented points per side the exact solver gets slow
// (cubic); callers are advised to switch to Sinkhorn.
inline constexpr std::size_t kExactSolverComfortLimit = 500;

inline double ground_distance(const DiagramPoint& p, const DiagramPoint& q, GroundMetric metric) {
  const double db = std::abs(p.birth - q.birth);
  const double dd = std::abs(p.death - q.death);
  return metric == GroundMetric::LInf ? std::max(db, dd) : std::hypot(db, dd);
}

inline double diagonal_distance(const DiagramPoint& p, GroundMetric metric) {
  const double life = std::abs(p.death - p.birth);
  return metric == GroundMetric::LInf ? life / 2.0 : life / std::sqrt(2.0);
}

// Square cost matrix of the partial-matching problem. Rows are the m1 points
// of the first diagram followed by m2 diagonal slots; columns are the m2
// points of the second diagram followed by m1 diagonal slots. A point pays its
// diagonal distance in any diagonal slot; slot-to-slot costs nothing.
struct AugmentedCost {
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  CostMatrix matrix;
};

namespace detail {

inline std::vector<DiagramPoint> finite_points(const PersistenceDiagram& d, std::optional<double> essential_cap) {
  std::vector<DiagramPoint> pts;
  pts.reserve(d.points.size());
  for (DiagramPoint p : d.points) {
    if (!std::isfinite(p.birth)) throw std::invalid_argument("diagram point with non-finite birth");
    if (p.essential()) {
      if (!essential_cap)
        throw std::invalid_argument("diagram has essential points; set an essential cap to compare them");
      if (!(*essential_cap >= p.birth))
        throw std::invalid_argument("essential cap lies below an essential birth");
      p.death = *essential_cap;
    }
    if (!std::isfinite(p.death)) throw std::invalid_argument("diagram point with non-finite death");
    pts.push_back(p);
  }
  return pts;
}

inline void check_same_dim(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  if (a.dim != b.dim)
    throw std::invalid_argument("diagrams of different homology dimensions (" + std::to_string(a.dim) + " vs " +
                                std::to_string(b.dim) + ")");
}

}  // namespace detail

inline AugmentedCost augmented_cost(const std::vector<DiagramPoint>& p, const std::vector<DiagramPoint>& q,
                                    GroundMetric metric) {
  AugmentedCost a;
  a.m1 = p.size();
  a.m2 = q.size();
  const std::size_t n = a.m1 + a.m2;
  a.matrix = CostMatrix(n, 0.0);
  for (std::size_t i = 0; i < a.m1; ++i) {
    for (std::size_t j = 0; j < a.m2; ++j) a.matrix(i, j) = ground_distance(p[i], q[j], metric);
    const double diag = diagonal_distance(p[i], metric);
    for (std::size_t j = a.m2; j < n; ++j) a.matrix(i, j) = diag;
  }
  for (std::size_t j = 0; j < a.m2; ++j) {
    const double diag = diagonal_distance(q[j], metric);
    for (std::size_t i = a.m1; i < n; ++i) a.matrix(i, j) = diag;
  }
  return a;
}

// Exact plans are permutations of the augmented index set; Sinkhorn plans are
// dense couplings scaled so every row and column sums to one.
struct TransportPlan {
  std::vector<std::size_t> matching;
  std::vector<double> coupling;
  std::size_t size = 0;  // augmented points per side

  bool dense() const { return !coupling.empty(); }
};

struct DistanceResult {
  double distance = 0.0;
  TransportPlan plan;
  AugmentedCost cost;
  bool converged = true;
  std::size_t iters = 0;
  double marginal_violation = 0.0;
};

inline DistanceResult wasserstein_exact(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                                        std::optional<double> essential_cap = std::nullopt,
                                        GroundMetric metric = GroundMetric::LInf) {
  detail::check_same_dim(d1, d2);
  DistanceResult r;
  r.cost = augmented_cost(detail::finite_points(d1, essential_cap), detail::finite_points(d2, essential_cap), metric);
  r.plan.size = r.cost.matrix.n;
  r.plan.matching = solve_assignment(r.cost.matrix);
  for (std::size_t i = 0; i < r.plan.size; ++i) r.distance += r.cost.matrix(i, r.plan.matching[i]);
  return r;
}

// Smallest t such that the augmented bipartite graph restricted to edges of
// cost <= t has a perfect matching; binary search over the distinct costs.
inline double bottleneck(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                         std::optional<double> essential_cap = std::nullopt,
                         GroundMetric metric = GroundMetric::LInf) {
  detail::check_same_dim(d1, d2);
  const AugmentedCost a =
      augmented_cost(detail::finite_points(d1, essential_cap), detail::finite_points(d2, essential_cap), metric);
  const std::size_t n = a.matrix.n;
  if (n == 0) return 0.0;
  std::vector<double> candidates = a.matrix.c;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<std::vector<std::size_t>> adj(n);
  auto feasible = [&](double t) {
    for (std::size_t i = 0; i < n; ++i) {
      adj[i].clear();
      for (std::size_t j = 0; j < n; ++j)
        if (a.matrix(i, j) <= t) adj[i].push_back(j);
    }
    return hopcroft_karp(adj, n) == n;
  };
  std::size_t lo = 0, hi = candidates.size() - 1;  // the largest candidate is always feasible
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(candidates[mid])) hi = mid;
    else lo = mid + 1;
  }
  return candidates[lo];
}

struct SinkhornOptions {
  double alpha = 0.01;          // entropic regularization strength
  std::size_t max_iters = 1000000;
  double tol = 1e-6;            // L1 violation of the row marginals (total mass 1)
  std::optional<double> essential_cap;
  GroundMetric metric = GroundMetric::LInf;
};

// Entropy-regularized transport on the augmented cost matrix with uniform
// marginals 1/N, returning N * <P, C> (no entropy term) so the value is
// directly comparable with wasserstein_exact.
//
// The m1 diagonal columns are identical, as are the m2 diagonal rows. An
// entropic optimum spreads mass evenly over identical columns, so each group
// is solved as a single slot carrying the group's total mass and expanded
// again afterwards; this is exact, not an approximation.
//
// Scaling runs on a precomputed kernel exp((f + g - C) / alpha) with the
// scalings periodically absorbed into the log-domain potentials f, g. The
// regularization is annealed geometrically from the cost scale down to alpha,
// warm-starting each stage; max_iters covers all stages.
inline DistanceResult sinkhorn(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                               const SinkhornOptions& opt = {}) {
  detail::check_same_dim(d1, d2);
  if (!(opt.alpha > 0.0)) throw std::invalid_argument("sinkhorn: alpha must be positive");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("sinkhorn: tol must be positive");
  DistanceResult r;
  const auto p = detail::finite_points(d1, opt.essential_cap);
  const auto q = detail::finite_points(d2, opt.essential_cap);
  r.cost = augmented_cost(p, q, opt.metric);
  const std::size_t n = r.cost.matrix.n;
  r.plan.size = n;
  if (n == 0) return r;

  // Compressed problem: rows = p + one diagonal slot, cols = q + one slot.
  const std::size_t m1 = p.size(), m2 = q.size();
  const std::size_t rows = m1 + 1, cols = m2 + 1;
  const double unit = 1.0 / static_cast<double>(n);
  std::vector<double> a(rows, unit), b(cols, unit);
  a[m1] = static_cast<double>(m2) * unit;
  b[m2] = static_cast<double>(m1) * unit;
  std::vector<double> c(rows * cols, 0.0);
  for (std::size_t i = 0; i < m1; ++i) {
    for (std::size_t j = 0; j < m2; ++j) c[i * cols + j] = r.cost.matrix(i, j);
    c[i * cols + m2] = diagonal_distance(p[i], opt.metric);
  }
  for (std::size_t j = 0; j < m2; ++j) c[m1 * cols + j] = diagonal_distance(q[j], opt.metric);
  // A slot with zero mass (an empty diagram) drops out.
  std::vector<char> row_on(rows, 1), col_on(cols, 1);
  row_on[m1] = m2 > 0;
  col_on[m2] = m1 > 0;

  std::vector<double> f(rows, 0.0), g(cols, 0.0), u(rows, 1.0), v(cols, 1.0), kernel(rows * cols);
  double eps = 0.0;
  auto rebuild = [&] {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        kernel[i * cols + j] =
            row_on[i] && col_on[j] ? std::exp((f[i] + g[j] - c[i * cols + j]) / eps) : 0.0;
  };
  auto absorb = [&] {
    for (std::size_t i = 0; i < rows; ++i) if (row_on[i]) f[i] += eps * std::log(u[i]), u[i] = 1.0;
    for (std::size_t j = 0; j < cols; ++j) if (col_on[j]) g[j] += eps * std::log(v[j]), v[j] = 1.0;
    rebuild();
  };
  // Row-marginal L1 violation; columns are exact right after a v-update.
  auto violation = [&] {
    double viol = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (!row_on[i]) continue;
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) s += kernel[i * cols + j] * v[j];
      viol += std::abs(u[i] * s - a[i]);
    }
    return viol;
  };

  const double cmax = *std::max_element(c.begin(), c.end());
  std::vector<double> schedule;
  for (double e = std::max(cmax, opt.alpha); e > opt.alpha; e *= 0.5) schedule.push_back(e);
  schedule.push_back(opt.alpha);

  constexpr double kAbsorbAbove = 1e50;
  std::size_t iters = 0;
  double viol = std::numeric_limits<double>::infinity();
  for (std::size_t stage = 0; stage < schedule.size() && iters < opt.max_iters; ++stage) {
    eps = schedule[stage];
    absorb();
    const double stage_tol = stage + 1 == schedule.size() ? opt.tol : std::max(opt.tol, 1e-3);
    while (iters < opt.max_iters) {
      for (std::size_t i = 0; i < rows; ++i) {
        if (!row_on[i]) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += kernel[i * cols + j] * v[j];
        u[i] = a[i] / s;
      }
      for (std::size_t j = 0; j < cols; ++j) {
        if (!col_on[j]) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += kernel[i * cols + j] * u[i];
        v[j] = b[j] / s;
      }
      ++iters;
      bool big = false;
      for (double x : u) big = big || !(x < kAbsorbAbove && x > 1.0 / kAbsorbAbove);
      for (double x : v) big = big || !(x < kAbsorbAbove && x > 1.0 / kAbsorbAbove);
      if (big) absorb();
      if (iters % 10 == 0 || iters == opt.max_iters) {
        viol = violation();
        if (viol <= stage_tol) break;
      }
    }
  }
  if (eps != opt.alpha) {
    // Budget ran out before the last stage: report the plan at alpha anyway.
    absorb();
    eps = opt.alpha;
    rebuild();
  }
  viol = violation();
  if (!std::isfinite(viol)) throw NumericalError("sinkhorn: scaling produced non-finite values");
  r.iters = iters;
  r.marginal_violation = viol;
  r.converged = viol <= opt.tol;

  // Expand to the full augmented coupling, scaled by N.
  auto compressed = [&](std::size_t i, std::size_t j) { return u[i] * kernel[i * cols + j] * v[j]; };
  const double scale = static_cast<double>(n);
  r.plan.coupling.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ci = i < m1 ? i : m1;
    const double row_split = i < m1 ? 1.0 : 1.0 / static_cast<double>(m2);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t cj = j < m2 ? j : m2;
      const double col_split = j < m2 ? 1.0 : 1.0 / static_cast<double>(m1);
      r.plan.coupling[i * n + j] = scale * compressed(ci, cj) * row_split * col_split;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) total += compressed(i, j) * c[i * cols + j];
  r.distance = scale * total;
  return r;
}

}  // namespace topokit
