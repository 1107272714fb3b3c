#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "topokit/errors.hpp"
#include "topokit/persistence.hpp"
#include "topokit/topo_opt.hpp"

namespace topokit {

using json = nlohmann::json;

// Shortest round-trip decimal form, identical across runs.
inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/* **************************************************************************
 * Diagram JSON: {"dim": k, "points": [[b, d], ...]}, d = "inf" if essential
 * *************************************************************************/

inline json diagram_to_json(const PersistenceDiagram& d, const json& config = nullptr) {
  std::vector<DiagramPoint> pts = d.points;
  std::sort(pts.begin(), pts.end());
  json points = json::array();
  for (const auto& p : pts) {
    if (p.essential()) points.push_back({p.birth, "inf"});
    else points.push_back({p.birth, p.death});
  }
  json j = {{"dim", d.dim}, {"points", std::move(points)}};
  if (!config.is_null()) j["config"] = config;
  return j;
}

inline PersistenceDiagram diagram_from_json(const json& j) {
  try {
    PersistenceDiagram d;
    d.dim = j.at("dim").get<int>();
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2) throw IoError("diagram point must be a [birth, death] pair");
      const double b = p[0].get<double>();
      double death = 0.0;
      if (p[1].is_string()) {
        if (p[1].get<std::string>() != "inf") throw IoError("diagram death must be a number or \"inf\"");
        death = kInf;
      } else {
        death = p[1].get<double>();
      }
      d.points.push_back({b, death});
    }
    return d;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed diagram JSON: ") + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline PersistenceDiagram read_diagram_json(const std::string& path) { return diagram_from_json(read_json_file(path)); }

inline void write_diagram_json(const std::string& path, const PersistenceDiagram& d, const json& config = nullptr) {
  write_json_file(path, diagram_to_json(d, config));
}

/* **************************************************************************
 * CSV tables
 * *************************************************************************/

inline void write_config_comment(std::ostream& out, const json& config) {
  if (!config.is_null()) out << "# config: " << config.dump() << '\n';
}

// dim,count,essential_count,mean_lifetime,max_lifetime,bin_width,histogram
// with the histogram as ';'-separated bin counts.
inline void write_lifetime_csv(std::ostream& out, std::span<const LifetimeStats> stats, const json& config = nullptr) {
  write_config_comment(out, config);
  out << "dim,count,essential_count,mean_lifetime,max_lifetime,bin_width,histogram\n";
  for (const auto& s : stats) {
    out << s.dim << ',' << s.count << ',' << s.essential_count << ',' << format_double(s.mean_lifetime) << ','
        << format_double(s.max_lifetime) << ',' << format_double(s.bin_width) << ',';
    for (std::size_t k = 0; k < s.histogram.size(); ++k) out << (k ? ";" : "") << s.histogram[k];
    out << '\n';
  }
}

inline void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryPoint> traj, const json& config = nullptr) {
  write_config_comment(out, config);
  out << "step,value\n";
  for (const auto& t : traj) out << t.step << ',' << format_double(t.value) << '\n';
}

}  // namespace topokit
