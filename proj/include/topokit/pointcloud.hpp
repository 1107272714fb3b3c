#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "topokit/errors.hpp"
#include "topokit/rng.hpp"

namespace topokit {

/* **************************************************************************
 * Point clouds
 * *************************************************************************/

// n points in R^dim, stored row-major. Immutable after construction.
class PointCloud {
public:
  PointCloud(std::size_t n, std::size_t dim, std::vector<double> coords)
      : n_(n), dim_(dim), coords_(std::move(coords)) {
    if (n_ == 0 || dim_ == 0)
      throw std::invalid_argument("PointCloud: need at least one point and one dimension");
    if (coords_.size() != n_ * dim_)
      throw std::invalid_argument("PointCloud: coordinate count does not match n * dim");
    for (double c : coords_)
      if (!std::isfinite(c)) throw std::invalid_argument("PointCloud: non-finite coordinate");
  }

  // Convenience for literals: {{0, 0}, {3, 4}}.
  static PointCloud from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("PointCloud: no rows");
    const std::size_t dim = rows.front().size();
    std::vector<double> coords;
    coords.reserve(rows.size() * dim);
    for (const auto& r : rows) {
      if (r.size() != dim) throw std::invalid_argument("PointCloud: ragged rows");
      coords.insert(coords.end(), r.begin(), r.end());
    }
    return PointCloud(rows.size(), dim, std::move(coords));
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  double operator()(std::size_t i, std::size_t k) const { return coords_[i * dim_ + k]; }

  const std::vector<double>& coords() const { return coords_; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

private:
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> coords_;
};

// Dense symmetric n x n matrix of pairwise distances.
class DistanceMatrix {
public:
  DistanceMatrix(std::size_t n, std::vector<double> entries)
      : n_(n), entries_(std::move(entries)) {
    if (entries_.size() != n_ * n_)
      throw std::invalid_argument("DistanceMatrix: entry count does not match n * n");
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  const std::vector<double>& entries() const { return entries_; }

private:
  std::size_t n_;
  std::vector<double> entries_;
};

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

inline DistanceMatrix pairwise_distances(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean(cloud.point(i), cloud.point(j));
      e[i * n + j] = d;
      e[j * n + i] = d;
    }
  return DistanceMatrix(n, std::move(e));
}

/* **************************************************************************
 * Generators
 * *************************************************************************/

inline PointCloud gen_circle(std::size_t n, double radius, double noise_sd, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("gen_circle: n must be at least 3");
  if (!(radius > 0.0)) throw std::invalid_argument("gen_circle: radius must be positive");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("gen_circle: noise_sd must be >= 0");
  Rng rng(seed);
  std::vector<double> c(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    c[2 * k] = radius * std::cos(theta);
    c[2 * k + 1] = radius * std::sin(theta);
    if (noise_sd > 0.0) {
      c[2 * k] += rng.normal(0.0, noise_sd);
      c[2 * k + 1] += rng.normal(0.0, noise_sd);
    }
  }
  return PointCloud(n, 2, std::move(c));
}

inline PointCloud gen_gaussian_blob(std::size_t n, std::size_t dim, double sd, std::uint64_t seed) {
  if (n < 1 || dim < 1) throw std::invalid_argument("gen_gaussian_blob: n and dim must be >= 1");
  if (!(sd > 0.0)) throw std::invalid_argument("gen_gaussian_blob: sd must be positive");
  Rng rng(seed);
  std::vector<double> c(n * dim);
  for (double& x : c) x = rng.normal(0.0, sd);
  return PointCloud(n, dim, std::move(c));
}

// Moves every point by an independent vector drawn uniformly from the ball
// of radius delta.
inline PointCloud perturb(const PointCloud& cloud, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw std::invalid_argument("perturb: delta must be >= 0");
  if (delta == 0.0) return cloud;
  Rng rng(seed);
  const std::size_t dim = cloud.dim();
  std::vector<double> c = cloud.coords();
  std::vector<double> dir(dim);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double norm = 0.0;
    while (norm == 0.0) {
      norm = 0.0;
      for (double& x : dir) {
        x = rng.normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
    }
    // Clamp the radius so rounding in the products never leaves the ball.
    const double r = delta * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim)) * (1.0 - 1e-15);
    for (std::size_t k = 0; k < dim; ++k) c[i * dim + k] += r * dir[k] / norm;
  }
  return PointCloud(cloud.size(), dim, std::move(c));
}

struct Hole {
  std::array<double, 2> center;
  double radius;
};

// Uniform samples from the unit disk with circular holes removed.
inline PointCloud gen_disk_with_holes(std::size_t n, const std::vector<Hole>& holes, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_disk_with_holes: n must be >= 1");
  for (const Hole& h : holes) {
    if (!(h.radius > 0.0)) throw std::invalid_argument("gen_disk_with_holes: hole radius must be positive");
    if (std::hypot(h.center[0], h.center[1]) >= 1.0)
      throw std::invalid_argument("gen_disk_with_holes: hole center outside the unit disk");
  }
  Rng rng(seed);
  std::vector<double> c;
  c.reserve(2 * n);
  const std::size_t max_attempts = 1000 * (n + 1);
  std::size_t attempts = 0;
  while (c.size() < 2 * n) {
    if (++attempts > max_attempts)
      throw std::invalid_argument("gen_disk_with_holes: holes cover the disk (sampling failed)");
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    if (x * x + y * y > 1.0) continue;
    bool inside_hole = false;
    for (const Hole& h : holes)
      if (std::hypot(x - h.center[0], y - h.center[1]) < h.radius) inside_hole = true;
    if (inside_hole) continue;
    c.push_back(x);
    c.push_back(y);
  }
  return PointCloud(n, 2, std::move(c));
}

/* **************************************************************************
 * CSV
 * *************************************************************************/

// One point per line, comma separated, no header. Blank lines and lines
// starting with '#' are skipped.
inline PointCloud read_cloud_csv(std::istream& in) {
  std::vector<double> coords;
  std::size_t dim = 0;
  std::size_t n = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t fields = 0;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw IoError("point cloud CSV line " + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
      if (tok.find_first_not_of(" \t", used) != std::string::npos)
        throw IoError("point cloud CSV line " + std::to_string(lineno) + ": bad number '" + tok + "'");
      if (!std::isfinite(v))
        throw IoError("point cloud CSV line " + std::to_string(lineno) + ": non-finite value");
      coords.push_back(v);
      ++fields;
    }
    if (dim == 0) dim = fields;
    if (fields != dim)
      throw IoError("point cloud CSV line " + std::to_string(lineno) + ": ragged row (" +
                    std::to_string(fields) + " fields, expected " + std::to_string(dim) + ")");
    ++n;
  }
  if (n == 0) throw IoError("point cloud CSV: no points");
  return PointCloud(n, dim, std::move(coords));
}

inline PointCloud read_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_cloud_csv(in);
}

inline void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  char buf[32];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t k = 0; k < cloud.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", cloud(i, k));
      if (k) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace topokit
