#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "topokit/pointcloud.hpp"

namespace topokit {

using Index = std::uint32_t;
inline constexpr Index kNone = std::numeric_limits<Index>::max();

// Largest simplex dimension build_rips accepts unless the caller raises it.
inline constexpr int kDefaultDimLimit = 3;

// A simplex on at most four vertices, stored as its sorted vertex list.
// Unused slots are zero so that whole-array comparison is lexicographic
// among simplices of the same dimension.
struct Simplex {
  std::array<Index, 4> verts{};
  int dim = 0;

  static Simplex vertex(Index a) { return {{a, 0, 0, 0}, 0}; }
  static Simplex edge(Index a, Index b) { return {{a, b, 0, 0}, 1}; }
  static Simplex triangle(Index a, Index b, Index c) { return {{a, b, c, 0}, 2}; }
  static Simplex tetrahedron(Index a, Index b, Index c, Index d) { return {{a, b, c, d}, 3}; }

  std::span<const Index> vertices() const { return {verts.data(), static_cast<std::size_t>(dim + 1)}; }

  friend bool operator==(const Simplex&, const Simplex&) = default;
};

struct FiltrationEntry {
  Simplex simplex;
  double value;
};

// Canonical filtration order: value, then dimension, then vertex list.
inline bool filtration_less(const FiltrationEntry& a, const FiltrationEntry& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.simplex.dim != b.simplex.dim) return a.simplex.dim < b.simplex.dim;
  return a.simplex.verts < b.simplex.verts;
}

// Vietoris-Rips filtration in canonical order. Faces always precede cofaces.
class Filtration {
public:
  Filtration(std::vector<FiltrationEntry> entries, std::size_t n_vertices, int max_dim, double max_radius)
      : entries_(std::move(entries)), n_vertices_(n_vertices), max_dim_(max_dim), max_radius_(max_radius) {}

  std::size_t size() const { return entries_.size(); }
  std::size_t n_vertices() const { return n_vertices_; }
  int max_dim() const { return max_dim_; }
  double max_radius() const { return max_radius_; }

  const Simplex& simplex(std::size_t i) const { return entries_[i].simplex; }
  double value(std::size_t i) const { return entries_[i].value; }
  int dim(std::size_t i) const { return entries_[i].simplex.dim; }
  std::span<const FiltrationEntry> entries() const { return entries_; }

private:
  std::vector<FiltrationEntry> entries_;
  std::size_t n_vertices_;
  int max_dim_;
  double max_radius_;
};

// min over i of max over j of d(i, j). Above this radius some vertex is
// adjacent to everything, the complex is a cone, and no finite pair can die.
inline double enclosing_radius(const DistanceMatrix& dm) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dm.size(); ++i) {
    double row_max = 0.0;
    for (std::size_t j = 0; j < dm.size(); ++j) row_max = std::max(row_max, dm(i, j));
    best = std::min(best, row_max);
  }
  return dm.size() == 0 ? 0.0 : best;
}

// All simplices of dimension <= max_dim whose diameter is <= max_radius
// (closed threshold), each at its diameter. An empty max_radius means AUTO,
// i.e. enclosing_radius(dm).
inline Filtration build_rips(const DistanceMatrix& dm, int max_dim = 2,
                             std::optional<double> max_radius = std::nullopt,
                             int dim_limit = kDefaultDimLimit) {
  if (max_dim < 0) throw std::invalid_argument("build_rips: max_dim must be >= 0");
  if (max_dim > dim_limit || max_dim > 3)
    throw std::invalid_argument("build_rips: max_dim " + std::to_string(max_dim) + " exceeds limit " +
                                std::to_string(std::min(dim_limit, 3)));
  if (max_radius && !(*max_radius > 0.0))
    throw std::invalid_argument("build_rips: max_radius must be positive");
  const double r = max_radius ? *max_radius : enclosing_radius(dm);
  const Index n = static_cast<Index>(dm.size());

  std::vector<FiltrationEntry> out;
  for (Index i = 0; i < n; ++i) out.push_back({Simplex::vertex(i), 0.0});

  auto in = [&](Index a, Index b) { return dm(a, b) <= r; };
  if (max_dim >= 1) {
    for (Index a = 0; a < n; ++a)
      for (Index b = a + 1; b < n; ++b) {
        if (!in(a, b)) continue;
        const double dab = dm(a, b);
        out.push_back({Simplex::edge(a, b), dab});
        if (max_dim < 2) continue;
        for (Index c = b + 1; c < n; ++c) {
          if (!in(a, c) || !in(b, c)) continue;
          const double dabc = std::max({dab, dm(a, c), dm(b, c)});
          out.push_back({Simplex::triangle(a, b, c), dabc});
          if (max_dim < 3) continue;
          for (Index d = c + 1; d < n; ++d) {
            if (!in(a, d) || !in(b, d) || !in(c, d)) continue;
            out.push_back({Simplex::tetrahedron(a, b, c, d), std::max({dabc, dm(a, d), dm(b, d), dm(c, d)})});
          }
        }
      }
  }
  std::sort(out.begin(), out.end(), filtration_less);
  return Filtration(std::move(out), n, max_dim, r);
}

// One simplex per line: "value<TAB>v0,v1,...".
inline void write_filtration_dump(std::ostream& os, const Filtration& f) {
  char buf[32];
  for (const auto& e : f.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    os << buf << '\t';
    const auto v = e.simplex.vertices();
    for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
    os << '\n';
  }
}

}  // namespace topokit
