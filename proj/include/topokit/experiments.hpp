#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topokit/distance.hpp"
#include "topokit/ingest.hpp"
#include "topokit/io.hpp"
#include "topokit/persistence.hpp"
#include "topokit/rng.hpp"

namespace topokit {

// Image-crop experiments: lifetimes of center vs corner crops (exp1) and
// diagram distances between two disjoint samples per condition (exp2).

enum class Condition { Center, Corner, Shuffle };

inline std::string condition_name(Condition c) {
  switch (c) {
    case Condition::Center: return "center";
    case Condition::Corner: return "corner";
    case Condition::Shuffle: return "shuffle";
  }
  return "?";
}

inline Condition parse_condition(const std::string& s) {
  if (s == "center") return Condition::Center;
  if (s == "corner") return Condition::Corner;
  if (s == "shuffle") return Condition::Shuffle;
  throw std::invalid_argument("unknown condition '" + s + "' (expected center, corner or shuffle)");
}

struct ExperimentConfig {
  std::size_t n = 200;
  std::size_t crop_size = 10;
  double noise_sd = 0.1;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  int max_dim = 2;  // top simplex dimension; diagrams for 0..max_dim-1
  std::optional<double> max_radius;
  std::size_t bins = 20;
  std::vector<Condition> conditions;
  GroundMetric metric = GroundMetric::LInf;
  bool same_samples = false;  // exp2 test hook: both samples use the same images and noise
};

struct Summary {
  int dim = 0;
  double mean = 0.0;
  double variance = std::numeric_limits<double>::quiet_NaN();  // sample variance, NaN for one repeat
  double sd = std::numeric_limits<double>::quiet_NaN();
};

inline Summary summarize(int dim, const std::vector<double>& xs) {
  Summary s{dim};
  if (xs.empty()) return s;
  double total = 0.0;
  for (double x : xs) total += x;
  s.mean = total / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(xs.size() - 1);
    s.sd = std::sqrt(s.variance);
  }
  return s;
}

struct Exp1Condition {
  Condition condition = Condition::Center;
  std::vector<std::vector<LifetimeStats>> repeats;  // [repeat][dim]
  std::vector<Summary> summary;                      // mean_lifetime across repeats, per dim
  std::vector<double> pooled_histogram(int dim) const {
    std::vector<double> h;
    for (const auto& r : repeats) {
      const auto& s = r[static_cast<std::size_t>(dim)];
      if (h.size() < s.histogram.size()) h.resize(s.histogram.size(), 0.0);
      for (std::size_t k = 0; k < s.histogram.size(); ++k) h[k] += static_cast<double>(s.histogram[k]);
    }
    return h;
  }
};

struct Exp1Report {
  ExperimentConfig config;
  std::vector<std::uint64_t> repeat_seeds;
  std::vector<double> bin_width;  // per dim, shared by all conditions and repeats
  std::vector<Exp1Condition> conditions;
};

struct Exp2Condition {
  Condition condition = Condition::Center;
  std::vector<std::vector<double>> distances;  // [repeat][dim]
  std::vector<Summary> summary;
};

struct Exp2Report {
  ExperimentConfig config;
  std::vector<std::uint64_t> repeat_seeds;
  std::vector<Exp2Condition> conditions;
};

namespace detail {

inline void check_experiment(const ExperimentConfig& c, const ImageSet& images, std::size_t per_repeat) {
  if (c.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (c.n < 2) throw std::invalid_argument("n must be >= 2");
  if (c.bins < 1) throw std::invalid_argument("bins must be >= 1");
  if (c.max_dim < 1 || c.max_dim > kDefaultDimLimit)
    throw std::invalid_argument("max_dim must be in [1, " + std::to_string(kDefaultDimLimit) + "]");
  if (!(c.noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
  if (c.conditions.empty()) throw std::invalid_argument("no conditions requested");
  if (c.crop_size < 1 || c.crop_size > images.height || c.crop_size > images.width)
    throw std::invalid_argument("crop of size " + std::to_string(c.crop_size) + " does not fit " +
                                std::to_string(images.height) + "x" + std::to_string(images.width) + " images");
  if (images.count < per_repeat)
    throw std::invalid_argument("dataset has " + std::to_string(images.count) + " images, each repeat needs " +
                                std::to_string(per_repeat));
}

// Condition cloud from already-noised images. Shuffle permutes the center crop.
inline PointCloud condition_cloud(const NoisyImages& noisy, Condition c, std::size_t size, std::uint64_t shuffle_seed) {
  switch (c) {
    case Condition::Center: return crop(noisy, {CropRegion::Center, size});
    case Condition::Corner: return crop(noisy, {CropRegion::CornerTopLeft, size});
    case Condition::Shuffle: return shuffle_pixels(crop(noisy, {CropRegion::Center, size}), shuffle_seed);
  }
  throw std::invalid_argument("unknown condition");
}

inline std::vector<PersistenceDiagram> diagrams_of(const PointCloud& cloud, const ExperimentConfig& c) {
  const PersistenceResult pr = compute_persistence(cloud, c.max_dim, c.max_radius);
  std::vector<PersistenceDiagram> out;
  for (int k = 0; k < c.max_dim; ++k) out.push_back(diagram(pr.pairs, k));
  return out;
}

inline NoisyImages subset(const NoisyImages& all, std::size_t first, std::size_t count) {
  const std::size_t plane = all.height * all.width;
  NoisyImages s{count, all.height, all.width, {}};
  s.pixels.assign(all.pixels.begin() + static_cast<std::ptrdiff_t>(first * plane),
                  all.pixels.begin() + static_cast<std::ptrdiff_t>((first + count) * plane));
  return s;
}

}  // namespace detail

// Per repeat: one sample of n noisy images, cropped under every condition.
// Histogram bin width per dim is the largest finite lifetime seen anywhere
// divided by the bin count, so histograms are comparable.
inline Exp1Report run_exp1(const ImageSet& images, const ExperimentConfig& config) {
  detail::check_experiment(config, images, config.n);
  Exp1Report rep;
  rep.config = config;
  const std::size_t dims = static_cast<std::size_t>(config.max_dim);
  // [condition][repeat][dim]
  std::vector<std::vector<std::vector<PersistenceDiagram>>> diags(config.conditions.size());
  for (std::size_t r = 0; r < config.repeats; ++r) {
    const std::uint64_t seed = derive_seed(config.seed, r);
    rep.repeat_seeds.push_back(seed);
    Rng rng(seed);
    const auto chosen = sample_without_replacement(images.count, config.n, rng);
    const NoisyImages noisy = add_noise(images, chosen, config.noise_sd, rng);
    for (std::size_t c = 0; c < config.conditions.size(); ++c)
      diags[c].push_back(detail::diagrams_of(
          detail::condition_cloud(noisy, config.conditions[c], config.crop_size, derive_seed(seed, 1000 + c)), config));
  }
  rep.bin_width.assign(dims, 0.0);
  for (const auto& cond : diags)
    for (const auto& repeat : cond)
      for (std::size_t k = 0; k < dims; ++k)
        for (const auto& p : repeat[k].points)
          if (!p.essential()) rep.bin_width[k] = std::max(rep.bin_width[k], p.lifetime());
  for (double& w : rep.bin_width) w = w > 0.0 ? w / static_cast<double>(config.bins) : 1.0;

  for (std::size_t c = 0; c < config.conditions.size(); ++c) {
    Exp1Condition out{config.conditions[c], {}, {}};
    for (const auto& repeat : diags[c]) {
      std::vector<LifetimeStats> per_dim;
      for (std::size_t k = 0; k < dims; ++k) per_dim.push_back(lifetime_stats(repeat[k], config.bins, rep.bin_width[k]));
      out.repeats.push_back(std::move(per_dim));
    }
    for (std::size_t k = 0; k < dims; ++k) {
      std::vector<double> means;
      for (const auto& r : out.repeats) means.push_back(r[k].mean_lifetime);
      out.summary.push_back(summarize(static_cast<int>(k), means));
    }
    rep.conditions.push_back(std::move(out));
  }
  return rep;
}

// Per repeat: 2n distinct images, noised once and split into two samples of
// n. Every condition crops the same two samples; W1 per dim between them.
inline Exp2Report run_exp2(const ImageSet& images, const ExperimentConfig& config) {
  detail::check_experiment(config, images, config.same_samples ? config.n : 2 * config.n);
  Exp2Report rep;
  rep.config = config;
  const std::size_t dims = static_cast<std::size_t>(config.max_dim);
  for (Condition c : config.conditions) rep.conditions.push_back({c, {}, {}});
  for (std::size_t r = 0; r < config.repeats; ++r) {
    const std::uint64_t seed = derive_seed(config.seed, r);
    rep.repeat_seeds.push_back(seed);
    Rng rng(seed);
    NoisyImages a, b;
    if (config.same_samples) {
      const auto chosen = sample_without_replacement(images.count, config.n, rng);
      a = add_noise(images, chosen, config.noise_sd, rng);
      b = a;
    } else {
      const auto chosen = sample_without_replacement(images.count, 2 * config.n, rng);
      const NoisyImages all = add_noise(images, chosen, config.noise_sd, rng);
      a = detail::subset(all, 0, config.n);
      b = detail::subset(all, config.n, config.n);
    }
    for (std::size_t c = 0; c < config.conditions.size(); ++c) {
      const Condition cond = config.conditions[c];
      // The shuffle permutations differ between the two samples unless the
      // samples are forced identical.
      const std::uint64_t sa = derive_seed(seed, 1000 + c);
      const std::uint64_t sb = config.same_samples ? sa : derive_seed(seed, 2000 + c);
      const auto da = detail::diagrams_of(detail::condition_cloud(a, cond, config.crop_size, sa), config);
      const auto db = detail::diagrams_of(detail::condition_cloud(b, cond, config.crop_size, sb), config);
      std::vector<double> dist;
      for (std::size_t k = 0; k < dims; ++k)
        dist.push_back(wasserstein_exact(da[k], db[k], std::nullopt, config.metric).distance);
      rep.conditions[c].distances.push_back(std::move(dist));
    }
  }
  for (auto& cond : rep.conditions)
    for (std::size_t k = 0; k < dims; ++k) {
      std::vector<double> xs;
      for (const auto& r : cond.distances) xs.push_back(r[k]);
      cond.summary.push_back(summarize(static_cast<int>(k), xs));
    }
  return rep;
}

/* **************************************************************************
 * JSON
 * *************************************************************************/

namespace detail {

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json summary_json(const Summary& s, const char* mean_key) {
  return {{"dim", s.dim}, {mean_key, s.mean}, {"variance", number_or_null(s.variance)}, {"sd", number_or_null(s.sd)}};
}

inline json stats_json(const LifetimeStats& s) {
  return {{"dim", s.dim},
          {"count", s.count},
          {"essential_count", s.essential_count},
          {"mean_lifetime", s.mean_lifetime},
          {"max_lifetime", s.max_lifetime},
          {"bin_width", s.bin_width},
          {"histogram", s.histogram}};
}

}  // namespace detail

inline json exp1_to_json(const Exp1Report& rep, const json& config) {
  json conds = json::array();
  for (const auto& c : rep.conditions) {
    json repeats = json::array();
    for (std::size_t r = 0; r < c.repeats.size(); ++r) {
      json stats = json::array();
      for (const auto& s : c.repeats[r]) stats.push_back(detail::stats_json(s));
      repeats.push_back({{"repeat", r}, {"seed", rep.repeat_seeds[r]}, {"lifetimes", std::move(stats)}});
    }
    json summary = json::array();
    for (const auto& s : c.summary) summary.push_back(detail::summary_json(s, "mean_lifetime"));
    conds.push_back({{"name", condition_name(c.condition)}, {"repeats", std::move(repeats)}, {"summary", std::move(summary)}});
  }
  return {{"experiment", "exp1"}, {"config", config}, {"bin_width", rep.bin_width}, {"conditions", std::move(conds)}};
}

inline json exp2_to_json(const Exp2Report& rep, const json& config) {
  json conds = json::array();
  for (const auto& c : rep.conditions) {
    json repeats = json::array();
    for (std::size_t r = 0; r < c.distances.size(); ++r) {
      json dist = json::array();
      for (std::size_t k = 0; k < c.distances[r].size(); ++k) dist.push_back({{"dim", k}, {"distance", c.distances[r][k]}});
      repeats.push_back({{"repeat", r}, {"seed", rep.repeat_seeds[r]}, {"distances", std::move(dist)}});
    }
    json summary = json::array();
    for (const auto& s : c.summary) summary.push_back(detail::summary_json(s, "mean_distance"));
    conds.push_back({{"name", condition_name(c.condition)}, {"repeats", std::move(repeats)}, {"summary", std::move(summary)}});
  }
  return {{"experiment", "exp2"}, {"config", config}, {"conditions", std::move(conds)}};
}

}  // namespace topokit
