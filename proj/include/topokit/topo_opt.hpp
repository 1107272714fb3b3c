#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "topokit/distance.hpp"
#include "topokit/errors.hpp"
#include "topokit/persistence.hpp"

namespace topokit {

/* **************************************************************************
 * Attribution: diagram point -> simplices -> governing edges
 * *************************************************************************/

struct Edge {
  Index u = kNone;
  Index v = kNone;

  bool valid() const { return u != kNone; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

// The vertex pair realizing the simplex's diameter. Ties go to the
// lexicographically smallest pair. Vertices have no governing edge.
inline Edge governing_edge(const Simplex& s, const DistanceMatrix& dm) {
  if (s.dim == 0) return {};
  const auto v = s.vertices();
  Edge best{v[0], v[1]};
  double best_len = dm(v[0], v[1]);
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b)
      if (dm(v[a], v[b]) > best_len) {
        best_len = dm(v[a], v[b]);
        best = {v[a], v[b]};
      }
  return best;
}

struct PairAttribution {
  PersistencePair pair;
  Edge birth_edge;  // invalid for vertex creators (birth fixed at 0)
  Edge death_edge;  // invalid for essential classes
};

inline std::vector<PairAttribution> attribute(std::span<const PersistencePair> pairs, const Filtration& f,
                                              const DistanceMatrix& dm) {
  std::vector<PairAttribution> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    PairAttribution a{p, governing_edge(f.simplex(p.creator), dm), {}};
    if (!p.essential()) a.death_edge = governing_edge(f.simplex(p.destroyer), dm);
    out.push_back(a);
  }
  return out;
}

/* **************************************************************************
 * Diagram functionals
 * *************************************************************************/

// sum over i >= i0 of |d_i - b_i|^p ((d_i + b_i) / 2)^q, with points ranked by
// decreasing lifetime, so i0 = k skips the k most persistent features.
struct TotalPersistence {
  double p = 1.0;
  double q = 0.0;
  std::size_t i0 = 0;
  int dim = 1;
};

// Transport distance to a fixed target diagram. No alpha means the exact
// solver; otherwise Sinkhorn with that regularization.
struct WassersteinToTarget {
  PersistenceDiagram target;
  int dim = 1;
  std::optional<double> alpha;
  GroundMetric metric = GroundMetric::LInf;
};

enum class Direction { Minimize, Maximize };

struct DiagramFunctional {
  std::variant<TotalPersistence, WassersteinToTarget> kind;
  Direction direction = Direction::Minimize;

  int dim() const {
    return std::visit([](const auto& k) { return k.dim; }, kind);
  }
};

namespace detail {

// x^e with the conventions 0^0 = 1 and exponent 0 -> constant 1.
inline double power(double x, double e) { return e == 0.0 ? 1.0 : std::pow(x, e); }

inline void validate(const DiagramFunctional& spec) {
  if (const auto* t = std::get_if<TotalPersistence>(&spec.kind)) {
    if (!(t->p >= 0.0) || !(t->q >= 0.0)) throw std::invalid_argument("TotalPersistence: p and q must be >= 0");
    if (t->dim < 0) throw std::invalid_argument("TotalPersistence: dim must be >= 0");
  } else {
    const auto& w = std::get<WassersteinToTarget>(spec.kind);
    if (w.dim < 0) throw std::invalid_argument("WassersteinToTarget: dim must be >= 0");
    if (w.target.dim != w.dim) throw std::invalid_argument("WassersteinToTarget: target diagram has the wrong dim");
    if (w.target.has_essential()) throw std::invalid_argument("WassersteinToTarget: target diagram must be finite");
    if (w.alpha && !(*w.alpha > 0.0)) throw std::invalid_argument("WassersteinToTarget: alpha must be positive");
  }
}

// Ranking used for i0: decreasing lifetime, then birth, then death.
inline std::vector<std::size_t> persistence_rank(const std::vector<DiagramPoint>& pts) {
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double la = pts[a].lifetime(), lb = pts[b].lifetime();
    if (la != lb) return la > lb;
    if (pts[a].birth != pts[b].birth) return pts[a].birth < pts[b].birth;
    return pts[a].death < pts[b].death;
  });
  return order;
}

inline DistanceResult transport(const PersistenceDiagram& d, const WassersteinToTarget& w) {
  if (!w.alpha) return wasserstein_exact(d, w.target, std::nullopt, w.metric);
  SinkhornOptions opt;
  opt.alpha = *w.alpha;
  opt.metric = w.metric;
  return sinkhorn(d, w.target, opt);
}

// Value and partial derivatives with respect to every point's birth and death.
struct PointGradient {
  double value = 0.0;
  std::vector<double> d_birth;
  std::vector<double> d_death;
};

inline PointGradient differentiate(const PersistenceDiagram& d, const DiagramFunctional& spec) {
  PointGradient out;
  const std::size_t m = d.points.size();
  out.d_birth.assign(m, 0.0);
  out.d_death.assign(m, 0.0);

  if (const auto* t = std::get_if<TotalPersistence>(&spec.kind)) {
    const auto order = persistence_rank(d.points);
    for (std::size_t r = t->i0; r < order.size(); ++r) {
      const std::size_t i = order[r];
      const double b = d.points[i].birth, dd = d.points[i].death;
      const double life = std::abs(dd - b);
      const double mid = (dd + b) / 2.0;
      const double lp = power(life, t->p), mq = power(mid, t->q);
      out.value += lp * mq;
      // d|d-b|/dd = sign(d-b); d(mid)/dd = d(mid)/db = 1/2.
      const double sgn = dd > b ? 1.0 : (dd < b ? -1.0 : 0.0);
      const double dlife = t->p == 0.0 ? 0.0 : t->p * power(life, t->p - 1.0);
      const double dmid = t->q == 0.0 ? 0.0 : t->q * power(mid, t->q - 1.0);
      out.d_death[i] = dlife * sgn * mq + lp * dmid * 0.5;
      out.d_birth[i] = -dlife * sgn * mq + lp * dmid * 0.5;
    }
    return out;
  }

  // Envelope rule: hold the optimal plan fixed and differentiate its cost.
  const auto& w = std::get<WassersteinToTarget>(spec.kind);
  const DistanceResult tr = transport(d, w);
  out.value = tr.distance;
  const std::size_t m2 = w.target.points.size();
  const std::size_t n = tr.plan.size;
  auto add_edge_grad = [&](std::size_t i, std::size_t j, double weight) {
    const DiagramPoint& p = d.points[i];
    if (j >= m2) {
      const double s = w.metric == GroundMetric::LInf ? 0.5 : 1.0 / std::sqrt(2.0);
      const double sgn = p.death >= p.birth ? 1.0 : -1.0;
      out.d_death[i] += weight * s * sgn;
      out.d_birth[i] -= weight * s * sgn;
      return;
    }
    const DiagramPoint& q = w.target.points[j];
    const double db = p.birth - q.birth, dd = p.death - q.death;
    auto sign = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
    if (w.metric == GroundMetric::LInf) {
      if (std::abs(db) > std::abs(dd)) out.d_birth[i] += weight * sign(db);
      else out.d_death[i] += weight * sign(dd);
    } else {
      const double norm = std::hypot(db, dd);
      if (norm > 0.0) {
        out.d_birth[i] += weight * db / norm;
        out.d_death[i] += weight * dd / norm;
      }
    }
  };
  for (std::size_t i = 0; i < m; ++i) {
    if (tr.plan.dense()) {
      for (std::size_t j = 0; j < n; ++j) {
        const double pij = tr.plan.coupling[i * n + j];
        if (pij != 0.0) add_edge_grad(i, j, pij);
      }
    } else {
      add_edge_grad(i, tr.plan.matching[i], 1.0);
    }
  }
  return out;
}

}  // namespace detail

inline double eval_functional(const PersistenceDiagram& d, const DiagramFunctional& spec) {
  detail::validate(spec);
  if (d.dim != spec.dim()) throw std::invalid_argument("eval_functional: diagram dimension does not match functional");
  return detail::differentiate(d, spec).value;
}

/* **************************************************************************
 * Gradients with respect to point coordinates
 * *************************************************************************/

// Per-point gradient, laid out like PointCloud coordinates.
struct GradientField {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t k) const { return values[i * dim + k]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

struct GradOptions {
  int max_dim = 2;
  std::optional<double> max_radius;  // empty = AUTO
};

struct GradResult {
  double value = 0.0;
  GradientField grad;
  PersistenceDiagram diagram;
  std::vector<PairAttribution> attribution;  // one per diagram point, same order
  std::size_t degenerate_edges = 0;          // zero-length governing edges, contribution dropped
};

namespace detail {

// Adds weight * dF/dx for one functional, given persistence already computed.
inline void accumulate_grad(const PointCloud& cloud, const DistanceMatrix& dm, const PersistenceResult& pr,
                            const DiagramFunctional& spec, double weight, GradResult& out) {
  const int dim = spec.dim();
  // Finite, positive-persistence pairs of the requested dimension, matching
  // diagram() with default flags point for point.
  std::vector<PersistencePair> in_scope;
  for (const auto& p : pr.pairs)
    if (p.dim == dim && !p.essential() && p.death != p.birth) in_scope.push_back(p);

  out.attribution = attribute(in_scope, pr.filtration, dm);
  out.diagram = PersistenceDiagram{dim, {}};
  for (const auto& p : in_scope) out.diagram.points.push_back({p.birth, p.death});

  const PointGradient pg = differentiate(out.diagram, spec);
  out.value += weight * pg.value;

  const std::size_t d = cloud.dim();
  auto push = [&](const Edge& e, double coeff) {
    if (!e.valid() || coeff == 0.0) return;
    const double len = dm(e.u, e.v);
    if (!(len > 0.0)) {
      ++out.degenerate_edges;
      return;
    }
    for (std::size_t k = 0; k < d; ++k) {
      const double unit = weight * (cloud(e.u, k) - cloud(e.v, k)) / len;
      out.grad.values[e.u * d + k] += coeff * unit;
      out.grad.values[e.v * d + k] -= coeff * unit;
    }
  };
  for (std::size_t i = 0; i < out.attribution.size(); ++i) {
    push(out.attribution[i].birth_edge, pg.d_birth[i]);
    push(out.attribution[i].death_edge, pg.d_death[i]);
  }
}

inline void check_grad_dim(int dim, const GradOptions& opt) {
  if (dim + 1 > opt.max_dim)
    throw std::invalid_argument("grad: max_dim " + std::to_string(opt.max_dim) +
                                " is too small to destroy classes of dimension " + std::to_string(dim));
}

}  // namespace detail

// Chain rule: functional -> (b_i, d_i) -> governing-edge lengths -> points.
inline GradResult grad(const PointCloud& cloud, const DiagramFunctional& spec, const GradOptions& opt = {}) {
  detail::validate(spec);
  detail::check_grad_dim(spec.dim(), opt);
  const DistanceMatrix dm = pairwise_distances(cloud);
  const PersistenceResult pr = compute_persistence(dm, opt.max_dim, opt.max_radius);
  GradResult out;
  out.grad = {cloud.size(), cloud.dim(), std::vector<double>(cloud.size() * cloud.dim(), 0.0)};
  detail::accumulate_grad(cloud, dm, pr, spec, 1.0, out);
  return out;
}

// A sum of weighted functionals, always minimized: maximized terms enter
// with a negative sign. Terms may target different homology dimensions.
struct WeightedFunctional {
  DiagramFunctional functional;
  double weight = 1.0;
};

// value and grad are those of the signed sum; diagram and attribution are
// left empty.
inline GradResult grad(const PointCloud& cloud, std::span<const WeightedFunctional> terms, const GradOptions& opt = {}) {
  if (terms.empty()) throw std::invalid_argument("grad: objective has no terms");
  for (const auto& t : terms) {
    detail::validate(t.functional);
    detail::check_grad_dim(t.functional.dim(), opt);
    if (!std::isfinite(t.weight)) throw std::invalid_argument("grad: term weight must be finite");
  }
  const DistanceMatrix dm = pairwise_distances(cloud);
  const PersistenceResult pr = compute_persistence(dm, opt.max_dim, opt.max_radius);
  GradResult out;
  out.grad = {cloud.size(), cloud.dim(), std::vector<double>(cloud.size() * cloud.dim(), 0.0)};
  for (const auto& t : terms) {
    const double sign = t.functional.direction == Direction::Minimize ? 1.0 : -1.0;
    GradResult part;
    part.grad = out.grad;
    detail::accumulate_grad(cloud, dm, pr, t.functional, sign * t.weight, part);
    out.value += part.value;
    out.grad = std::move(part.grad);
    out.degenerate_edges += part.degenerate_edges;
  }
  return out;
}

/* **************************************************************************
 * Gradient descent / ascent on point coordinates
 * *************************************************************************/

struct OptimizeOptions {
  double lr = 0.01;
  std::size_t steps = 100;
  std::size_t record_every = 1;
  GradOptions grad;
  // A minimized objective that grows beyond this multiple of its starting
  // value (plus one, to handle a zero start) is treated as diverged.
  double divergence_factor = 100.0;
  // A step moving some point farther than this fraction of the cloud's
  // bounding-box diagonal is an unstable step size and also counts as
  // divergence. Infinity disables the check.
  double max_step_fraction = 1.0;
};

struct TrajectoryPoint {
  std::size_t step;
  double value;
  PointCloud cloud;
};

struct OptimizeResult {
  std::vector<TrajectoryPoint> trajectory;
  bool diverged = false;
  std::string failure;
};

namespace detail {

inline double bounding_diagonal(const PointCloud& x) {
  double sq = 0.0;
  for (std::size_t k = 0; k < x.dim(); ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < x.size(); ++i) {
      lo = std::min(lo, x(i, k));
      hi = std::max(hi, x(i, k));
    }
    if (x.size() > 0) sq += (hi - lo) * (hi - lo);
  }
  return std::sqrt(sq);
}

template <class Eval>
OptimizeResult optimize_with(const PointCloud& start, Eval&& eval, Direction direction, const OptimizeOptions& opt) {
  if (!(opt.lr > 0.0)) throw std::invalid_argument("optimize: lr must be positive");
  if (opt.steps < 1) throw std::invalid_argument("optimize: steps must be >= 1");
  if (opt.record_every < 1) throw std::invalid_argument("optimize: record_every must be >= 1");
  const double sign = direction == Direction::Minimize ? -1.0 : 1.0;

  OptimizeResult out;
  PointCloud x = start;
  double initial = 0.0;
  std::optional<TrajectoryPoint> last_valid;
  auto keep_last_valid = [&] {
    if (last_valid && (out.trajectory.empty() || out.trajectory.back().step != last_valid->step))
      out.trajectory.push_back(*last_valid);
  };
  for (std::size_t step = 0;; ++step) {
    GradResult g;
    std::string failure;
    try {
      g = eval(x);
    } catch (const NumericalError& e) {
      failure = e.what();
    }
    bool finite = failure.empty() && std::isfinite(g.value);
    if (finite)
      for (double v : g.grad.values) finite = finite && std::isfinite(v);
    if (finite && step == 0) initial = g.value;
    if (finite && step > 0 && direction == Direction::Minimize &&
        g.value > opt.divergence_factor * (std::abs(initial) + 1.0)) {
      failure = "objective grew from " + std::to_string(initial) + " to " + std::to_string(g.value);
      finite = false;
    }
    if (!finite) {
      keep_last_valid();
      out.diverged = true;
      out.failure = failure.empty() ? "non-finite value or gradient at step " + std::to_string(step) : failure;
      return out;
    }
    const bool last = step == opt.steps;
    if (step % opt.record_every == 0 || last) out.trajectory.push_back({step, g.value, x});
    else last_valid = TrajectoryPoint{step, g.value, x};
    if (last) break;
    if (step % opt.record_every == 0) last_valid = out.trajectory.back();

    const double extent = bounding_diagonal(x);
    double max_move = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double sq = 0.0;
      for (double v : g.grad.row(i)) sq += v * v;
      max_move = std::max(max_move, opt.lr * std::sqrt(sq));
    }
    if (extent > 0.0 && max_move > opt.max_step_fraction * extent) {
      keep_last_valid();
      out.diverged = true;
      out.failure = "step " + std::to_string(step) + " would move a point by " + std::to_string(max_move) +
                    ", more than the cloud extent " + std::to_string(extent);
      return out;
    }
    std::vector<double> next = x.coords();
    for (std::size_t k = 0; k < next.size(); ++k) next[k] += sign * opt.lr * g.grad.values[k];
    for (double c : next)
      if (!std::isfinite(c)) {
        keep_last_valid();
        out.diverged = true;
        out.failure = "non-finite coordinates after step " + std::to_string(step);
        return out;
      }
    x = PointCloud(x.size(), x.dim(), std::move(next));
  }
  return out;
}

}  // namespace detail

// Plain gradient steps, recomputing the filtration and pairing at every step.
// Step 0 is the starting cloud; the final step is always recorded. On a
// non-finite or runaway value the run stops, keeping what was recorded plus
// the last valid state.
inline OptimizeResult optimize(const PointCloud& start, const DiagramFunctional& spec, const OptimizeOptions& opt) {
  detail::validate(spec);
  detail::check_grad_dim(spec.dim(), opt.grad);
  return detail::optimize_with(start, [&](const PointCloud& x) { return grad(x, spec, opt.grad); }, spec.direction, opt);
}

// Minimizes the signed weighted sum; see WeightedFunctional.
inline OptimizeResult optimize(const PointCloud& start, std::span<const WeightedFunctional> terms,
                               const OptimizeOptions& opt) {
  if (terms.empty()) throw std::invalid_argument("optimize: objective has no terms");
  return detail::optimize_with(start, [&](const PointCloud& x) { return grad(x, terms, opt.grad); },
                               Direction::Minimize, opt);
}

}  // namespace topokit
