#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "topokit/filtration.hpp"
#include "topokit/pointcloud.hpp"

namespace topokit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/* **************************************************************************
 * Boundary matrix
 * *************************************************************************/

// Z/2 boundary matrix in compressed-column form. Column j holds the
// filtration indices of the codimension-1 faces of simplex j, ascending.
class BoundaryMatrix {
public:
  BoundaryMatrix() : offsets_{0} {}

  std::size_t size() const { return offsets_.size() - 1; }
  std::span<const Index> column(std::size_t j) const {
    return {entries_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
  }

  void push_column(std::span<const Index> rows) {
    entries_.insert(entries_.end(), rows.begin(), rows.end());
    offsets_.push_back(entries_.size());
  }

private:
  std::vector<std::size_t> offsets_;
  std::vector<Index> entries_;
};

namespace detail {

inline std::uint64_t pack_key(std::span<const Index> v) {
  std::uint64_t key = 0;
  for (Index x : v) key = (key << 21) | x;
  return key;
}

}  // namespace detail

inline BoundaryMatrix boundary_matrix(const Filtration& f) {
  const std::size_t n = f.n_vertices();
  std::vector<Index> vertex_pos(n, kNone);
  std::vector<Index> edge_pos;
  if (f.max_dim() >= 1) edge_pos.assign(n * n, kNone);
  std::unordered_map<std::uint64_t, Index> tri_pos;
  if (f.max_dim() >= 3 && n >= (1u << 21))
    throw std::invalid_argument("boundary_matrix: too many vertices for dimension 3");

  for (std::size_t i = 0; i < f.size(); ++i) {
    const Simplex& s = f.simplex(i);
    switch (s.dim) {
      case 0: vertex_pos[s.verts[0]] = static_cast<Index>(i); break;
      case 1: edge_pos[s.verts[0] * n + s.verts[1]] = static_cast<Index>(i); break;
      case 2:
        if (f.max_dim() >= 3) tri_pos.emplace(detail::pack_key(s.vertices()), static_cast<Index>(i));
        break;
      default: break;
    }
  }

  BoundaryMatrix bm;
  std::array<Index, 4> col{};
  std::array<Index, 3> face{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Simplex& s = f.simplex(i);
    const auto v = s.vertices();
    std::size_t k = 0;
    if (s.dim == 1) {
      col[k++] = vertex_pos[v[0]];
      col[k++] = vertex_pos[v[1]];
    } else if (s.dim == 2) {
      col[k++] = edge_pos[v[0] * n + v[1]];
      col[k++] = edge_pos[v[0] * n + v[2]];
      col[k++] = edge_pos[v[1] * n + v[2]];
    } else if (s.dim == 3) {
      for (std::size_t drop = 0; drop < 4; ++drop) {
        std::size_t m = 0;
        for (std::size_t t = 0; t < 4; ++t)
          if (t != drop) face[m++] = v[t];
        col[k++] = tri_pos.at(detail::pack_key(face));
      }
    }
    std::sort(col.begin(), col.begin() + k);
    bm.push_column({col.data(), k});
  }
  return bm;
}

/* **************************************************************************
 * Persistence pairs
 * *************************************************************************/

struct PersistencePair {
  int dim;
  double birth;
  double death;  // kInf for essential classes
  Index creator;
  Index destroyer;  // kNone for essential classes

  bool essential() const { return destroyer == kNone; }
  double lifetime() const { return death - birth; }

  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

// Standard Z/2 column reduction with clearing. Dimensions are processed from
// the top down; the pivot row of every reduced column is a creator whose own
// column would reduce to zero, so it is skipped.
//
// Classes are reported for dimensions below the top simplex dimension (for a
// vertex-only filtration, dimension 0). Creators in the top dimension could
// only be killed by simplices that were not built.
inline std::vector<PersistencePair> reduce(const BoundaryMatrix& bm, const Filtration& f) {
  const std::size_t m = f.size();
  if (bm.size() != m) throw std::invalid_argument("reduce: boundary matrix does not match filtration");
  const int top = f.max_dim();
  const int report_dim = std::max(top - 1, 0);

  std::vector<std::vector<Index>> by_dim(static_cast<std::size_t>(top) + 1);
  for (std::size_t j = 0; j < m; ++j) by_dim[static_cast<std::size_t>(f.dim(j))].push_back(static_cast<Index>(j));

  std::vector<Index> pivot_owner(m, kNone);
  std::vector<std::vector<Index>> reduced(m);
  std::vector<char> cleared(m, 0);
  std::vector<char> destroyer(m, 0);

  std::vector<Index> work;
  std::vector<Index> scratch;
  std::vector<PersistencePair> pairs;

  for (int d = top; d >= 1; --d) {
    for (Index j : by_dim[static_cast<std::size_t>(d)]) {
      if (cleared[j]) continue;
      const auto col = bm.column(j);
      work.assign(col.begin(), col.end());
      while (!work.empty()) {
        const Index owner = pivot_owner[work.back()];
        if (owner == kNone) break;
        const auto& other = reduced[owner];
        scratch.clear();
        std::set_symmetric_difference(work.begin(), work.end(), other.begin(), other.end(),
                                      std::back_inserter(scratch));
        work.swap(scratch);
      }
      if (work.empty()) continue;
      const Index low = work.back();
      pivot_owner[low] = j;
      cleared[low] = 1;
      destroyer[j] = 1;
      if (d - 1 <= report_dim)
        pairs.push_back({d - 1, f.value(low), f.value(j), low, j});
      reduced[j] = work;
    }
    // Columns of dimension d are never added to lower-dimensional columns.
    for (Index j : by_dim[static_cast<std::size_t>(d)]) std::vector<Index>().swap(reduced[j]);
  }

  for (std::size_t j = 0; j < m; ++j) {
    if (f.dim(j) > report_dim) continue;
    if (destroyer[j] || pivot_owner[j] != kNone) continue;
    pairs.push_back({f.dim(j), f.value(j), kInf, static_cast<Index>(j), kNone});
  }
  std::sort(pairs.begin(), pairs.end(), [](const PersistencePair& a, const PersistencePair& b) {
    return std::tie(a.dim, a.creator) < std::tie(b.dim, b.creator);
  });
  return pairs;
}

// Filtration plus its pairing, the usual starting point for everything else.
struct PersistenceResult {
  Filtration filtration;
  std::vector<PersistencePair> pairs;
};

inline PersistenceResult compute_persistence(const DistanceMatrix& dm, int max_dim = 2,
                                             std::optional<double> max_radius = std::nullopt) {
  Filtration f = build_rips(dm, max_dim, max_radius);
  auto pairs = reduce(boundary_matrix(f), f);
  return {std::move(f), std::move(pairs)};
}

inline PersistenceResult compute_persistence(const PointCloud& cloud, int max_dim = 2,
                                             std::optional<double> max_radius = std::nullopt) {
  return compute_persistence(pairwise_distances(cloud), max_dim, max_radius);
}

/* **************************************************************************
 * Diagrams and summaries
 * *************************************************************************/

struct DiagramPoint {
  double birth;
  double death;

  double lifetime() const { return death - birth; }
  bool essential() const { return std::isinf(death); }

  friend auto operator<=>(const DiagramPoint&, const DiagramPoint&) = default;
};

struct PersistenceDiagram {
  int dim = 0;
  std::vector<DiagramPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_essential() const {
    return std::any_of(points.begin(), points.end(), [](const DiagramPoint& p) { return p.essential(); });
  }
};

// Points of one dimension. Zero-persistence and essential points are dropped
// unless requested.
inline PersistenceDiagram diagram(std::span<const PersistencePair> pairs, int dim, bool include_zero = false,
                                  bool include_essential = false) {
  PersistenceDiagram d{dim, {}};
  for (const auto& p : pairs) {
    if (p.dim != dim) continue;
    if (p.essential() && !include_essential) continue;
    if (!p.essential() && p.death == p.birth && !include_zero) continue;
    d.points.push_back({p.birth, p.death});
  }
  return d;
}

// Number of classes of dimension dim alive at eps: birth <= eps < death.
inline std::size_t betti_curve(std::span<const PersistencePair> pairs, int dim, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("betti_curve: eps must be >= 0");
  return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [&](const PersistencePair& p) {
    return p.dim == dim && p.birth <= eps && eps < p.death;
  }));
}

struct LifetimeStats {
  int dim = 0;
  std::size_t count = 0;            // finite points
  std::size_t essential_count = 0;
  double mean_lifetime = 0.0;
  double max_lifetime = 0.0;
  double bin_width = 0.0;
  std::vector<std::size_t> histogram;  // bins [k*w, (k+1)*w); last bin absorbs overflow
};

inline LifetimeStats lifetime_stats(const PersistenceDiagram& d, std::size_t bins, double bin_width) {
  if (bins < 1) throw std::invalid_argument("lifetime_stats: bins must be >= 1");
  if (!(bin_width > 0.0)) throw std::invalid_argument("lifetime_stats: bin_width must be positive");
  LifetimeStats s;
  s.dim = d.dim;
  s.bin_width = bin_width;
  s.histogram.assign(bins, 0);
  double total = 0.0;
  for (const auto& p : d.points) {
    if (p.essential()) {
      ++s.essential_count;
      continue;
    }
    const double life = p.lifetime();
    ++s.count;
    total += life;
    s.max_lifetime = std::max(s.max_lifetime, life);
    const double k = std::floor(life / bin_width);
    const std::size_t bin = k >= static_cast<double>(bins - 1) ? bins - 1 : static_cast<std::size_t>(std::max(k, 0.0));
    ++s.histogram[bin];
  }
  if (s.count > 0) s.mean_lifetime = total / static_cast<double>(s.count);
  return s;
}

/* **************************************************************************
 * Dimension 0 by union-find
 * *************************************************************************/

// Kruskal sweep over all edges in filtration order. Every vertex is born at
// 0; each merging edge kills one class; one class never dies.
inline PersistenceDiagram h0_unionfind(const DistanceMatrix& dm, bool include_zero = false,
                                       bool include_essential = false) {
  const Index n = static_cast<Index>(dm.size());
  if (n == 0) throw std::invalid_argument("h0_unionfind: empty distance matrix");
  struct Edge {
    double value;
    Index a, b;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b) edges.push_back({dm(a, b), a, b});
  std::sort(edges.begin(), edges.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.value, x.a, x.b) < std::tie(y.value, y.a, y.b); });

  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  PersistenceDiagram d{0, {}};
  std::size_t merges = 0;
  for (const Edge& e : edges) {
    const Index ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    parent[std::max(ra, rb)] = std::min(ra, rb);
    if (e.value > 0.0 || include_zero) d.points.push_back({0.0, e.value});
    if (++merges + 1 == n) break;
  }
  if (include_essential) d.points.push_back({0.0, kInf});
  return d;
}

}  // namespace topokit
