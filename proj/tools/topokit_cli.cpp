// topokit command-line driver.
// Exit codes: 0 ok, 1 bad configuration, 2 I/O failure, 3 numerical failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "topokit/topokit.hpp"

namespace fs = std::filesystem;
using namespace topokit;

namespace {

enum Exit { kOk = 0, kConfig = 1, kIo = 2, kNumerical = 3 };

struct Common {
  std::uint64_t seed = 0;
  int max_dim = 2;
  std::string max_radius = "auto";
  std::string out_dir = ".";
  std::string config;

  std::optional<double> radius() const {
    if (max_radius == "auto" || max_radius == "AUTO") return std::nullopt;
    std::size_t used = 0;
    double r = 0.0;
    try {
      r = std::stod(max_radius, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != max_radius.size() || !(r > 0.0))
      throw std::invalid_argument("--max-radius must be a positive number or 'auto', got '" + max_radius + "'");
    return r;
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "master random seed");
  sub->add_option("--max-dim", c.max_dim, "top simplex dimension; diagrams for dims below it");
  sub->add_option("--max-radius", c.max_radius, "filtration cutoff, or 'auto' for the enclosing radius");
  sub->add_option("--out-dir", c.out_dir, "directory for output files");
  sub->add_option("--config", c.config, "key=value file; command-line flags win");
}

// CLI11 only reads config files for the top-level app, so a subcommand's
// --config file is spliced into the arguments here: each key becomes a
// --key=value argument unless the command line already sets that key.
// Keys may sit at the top of the file or under a [subcommand] section.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  const std::string sub = args[1];
  auto given = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  std::vector<std::string> out = args;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(in)) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub)) continue;
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config" || given(key)) continue;
    for (const auto& v : item.inputs) out.push_back("--" + key + "=" + v);
  }
  return out;
}

// Everything the user set or defaulted, in a stable order.
json config_echo(const CLI::App& sub) {
  json cfg = json::object();
  cfg["command"] = sub.get_name();
  for (const CLI::Option* o : sub.get_options()) {
    if (o->get_lnames().empty()) continue;
    const std::string& name = o->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (o->count() > 0) {
      std::string joined;
      for (const auto& r : o->results()) joined += (joined.empty() ? "" : ",") + r;
      cfg[name] = joined;
    } else {
      cfg[name] = o->get_default_str();
    }
  }
  return cfg;
}

fs::path prepare_out(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + c.out_dir + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

// Config echo as an XML comment right after the <svg> tag. "--" may not
// appear inside a comment; the JSON escape keeps the text parseable.
std::string svg_with_config(std::string svg, const json& config) {
  std::string dump = config.dump();
  for (std::size_t at = dump.find("--"); at != std::string::npos; at = dump.find("--", at))
    dump.replace(at + 1, 1, "\\u002d");
  return svg.insert(svg.find('\n') + 1, "<!-- config: " + dump + " -->\n");
}

std::string cloud_csv(const PointCloud& cloud, const json& config) {
  std::ostringstream os;
  write_config_comment(os, config);
  write_cloud_csv(os, cloud);
  return os.str();
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

/* ---- point-cloud generators shared by gen, persist and optimize ---- */

struct GenSpec {
  std::string kind = "circle";
  std::size_t n = 60;
  std::size_t dim = 2;
  double radius = 1.0;
  double noise_sd = 0.0;
  double sd = 1.0;
  std::string holes = "0,0,0.5";
};

void add_gen_options(CLI::App* sub, GenSpec& g, bool with_kind_option) {
  if (with_kind_option)
    sub->add_option("--kind", g.kind, "circle, blob, disk-holes or images")
        ->check(CLI::IsMember({"circle", "blob", "disk-holes", "images"}));
  sub->add_option("--n", g.n, "number of points (or images)");
  sub->add_option("--dim", g.dim, "ambient dimension for blob");
  sub->add_option("--radius", g.radius, "circle radius");
  sub->add_option("--noise-sd", g.noise_sd, "circle noise standard deviation");
  sub->add_option("--sd", g.sd, "blob standard deviation");
  sub->add_option("--holes", g.holes, "disk-holes: cx,cy,r[;cx,cy,r...]");
}

std::vector<Hole> parse_holes(const std::string& s) {
  std::vector<Hole> holes;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    Hole h{};
    if (std::sscanf(item.c_str(), "%lf,%lf,%lf", &h.center[0], &h.center[1], &h.radius) != 3)
      throw std::invalid_argument("bad hole '" + item + "', expected cx,cy,r");
    holes.push_back(h);
  }
  return holes;
}

PointCloud generate(const GenSpec& g, std::uint64_t seed) {
  if (g.kind == "circle") return gen_circle(g.n, g.radius, g.noise_sd, seed);
  if (g.kind == "blob") return gen_gaussian_blob(g.n, g.dim, g.sd, seed);
  if (g.kind == "disk-holes") return gen_disk_with_holes(g.n, parse_holes(g.holes), seed);
  throw std::invalid_argument("generator '" + g.kind + "' does not produce a point cloud");
}

struct Source {
  std::string input;
  std::string generate;
  GenSpec gen;
};

void add_source(CLI::App* sub, Source& s) {
  auto* in = sub->add_option("--input", s.input, "point-cloud CSV");
  auto* gen = sub->add_option("--generate", s.generate, "generator instead of a file: circle, blob or disk-holes")
                  ->check(CLI::IsMember({"circle", "blob", "disk-holes"}));
  in->excludes(gen);
  add_gen_options(sub, s.gen, false);
}

PointCloud load_source(const Source& s, std::uint64_t seed) {
  if (!s.input.empty()) return read_cloud_csv(s.input);
  if (s.generate.empty()) throw std::invalid_argument("one of --input or --generate is required");
  GenSpec g = s.gen;
  g.kind = s.generate;
  return generate(g, seed);
}

GroundMetric parse_metric(const std::string& m) { return m == "l2" ? GroundMetric::L2 : GroundMetric::LInf; }

/* ---- subcommands ---- */

int cmd_gen(const CLI::App& sub, const Common& c, const GenSpec& g, const std::string& out_name) {
  const json cfg = config_echo(sub);
  if (g.kind == "images") {
    const ImageSet images = gen_structured_center_images(g.n, c.seed);
    const fs::path dir = prepare_out(c);
    const fs::path path = dir / (out_name.empty() ? "images.idx" : out_name);
    write_idx(path.string(), images);
    write_text(fs::path(path.string() + ".config.json"), json_text(cfg));
    return kOk;
  }
  const PointCloud cloud = generate(g, c.seed);
  const fs::path dir = prepare_out(c);
  write_text(dir / (out_name.empty() ? "cloud.csv" : out_name), cloud_csv(cloud, cfg));
  return kOk;
}

struct IngestArgs {
  std::string images;
  std::string region = "center";
  std::size_t crop = 10;
  std::size_t n = 200;
  double noise_sd = 0.1;
  bool shuffle = false;
  std::string out = "cloud.csv";
};

int cmd_ingest(const CLI::App& sub, const Common& c, const IngestArgs& a) {
  const json cfg = config_echo(sub);
  const ImageSet images = read_idx(a.images);
  const CropSpec spec{a.region == "corner" ? CropRegion::CornerTopLeft : CropRegion::Center, a.crop};
  PointCloud cloud = crop_to_cloud(images, spec, a.n, a.noise_sd, c.seed);
  if (a.shuffle) cloud = shuffle_pixels(cloud, derive_seed(c.seed, 1));
  const fs::path dir = prepare_out(c);
  write_text(dir / a.out, cloud_csv(cloud, cfg));
  return kOk;
}

struct PersistArgs {
  Source source;
  std::size_t bins = 20;
  bool essential = false;
  bool zero = false;
};

std::vector<LifetimeStats> stats_for(const std::vector<PersistenceDiagram>& ds, std::size_t bins,
                                     std::optional<double> bin_width) {
  std::vector<LifetimeStats> out;
  for (const auto& d : ds) {
    double w = bin_width.value_or(0.0);
    if (!bin_width) {
      for (const auto& p : d.points)
        if (!p.essential()) w = std::max(w, p.lifetime());
      w = w > 0.0 ? w / static_cast<double>(bins) : 1.0;
    }
    out.push_back(lifetime_stats(d, bins, w));
  }
  return out;
}

std::string lifetime_csv_text(const std::vector<LifetimeStats>& stats, const json& cfg) {
  std::ostringstream os;
  write_lifetime_csv(os, stats, cfg);
  return os.str();
}

int cmd_persist(const CLI::App& sub, const Common& c, const PersistArgs& a) {
  const json cfg = config_echo(sub);
  if (a.bins < 1) throw std::invalid_argument("--bins must be >= 1");
  const PointCloud cloud = load_source(a.source, c.seed);
  const PersistenceResult pr = compute_persistence(cloud, c.max_dim, c.radius());
  std::vector<PersistenceDiagram> ds;
  const int top = std::max(c.max_dim, 1);
  for (int k = 0; k < top; ++k) ds.push_back(diagram(pr.pairs, k, a.zero, a.essential));
  // lifetime statistics always count essentials, whatever the diagram flags
  std::vector<PersistenceDiagram> full;
  for (int k = 0; k < top; ++k) full.push_back(diagram(pr.pairs, k, false, true));
  const auto stats = stats_for(full, a.bins, std::nullopt);

  const fs::path dir = prepare_out(c);
  for (const auto& d : ds)
    write_text(dir / ("diagram_dim" + std::to_string(d.dim) + ".json"), json_text(diagram_to_json(d, cfg)));
  write_text(dir / "lifetimes.csv", lifetime_csv_text(stats, cfg));
  return kOk;
}

struct DistanceArgs {
  std::string a, b;
  std::string method = "exact";
  double alpha = 0.01;
  std::size_t max_iters = 1000000;
  double tol = 1e-6;
  std::optional<double> essential_cap;
  std::string metric = "linf";
  std::string out = "distance.json";
};

int cmd_distance(const CLI::App& sub, const Common& c, const DistanceArgs& a) {
  const json cfg = config_echo(sub);
  const PersistenceDiagram da = read_diagram_json(a.a);
  const PersistenceDiagram db = read_diagram_json(a.b);
  if (da.dim != db.dim)
    throw std::invalid_argument("diagrams of different homology dimensions (" + std::to_string(da.dim) + " vs " +
                                std::to_string(db.dim) + ")");
  const GroundMetric metric = parse_metric(a.metric);
  json rec = {{"method", a.method}, {"dim", da.dim}};
  if (a.method == "exact") {
    const std::size_t n = da.points.size() + db.points.size();
    if (n > kExactSolverComfortLimit)
      std::cerr << "warning: exact solver on " << n << " augmented points per side is slow; consider --method sinkhorn\n";
    const DistanceResult r = wasserstein_exact(da, db, a.essential_cap, metric);
    rec["distance"] = r.distance;
    rec["converged"] = true;
    rec["iters"] = r.iters;
  } else if (a.method == "bottleneck") {
    rec["distance"] = bottleneck(da, db, a.essential_cap, metric);
    rec["converged"] = true;
    rec["iters"] = 0;
  } else {
    SinkhornOptions opt;
    opt.alpha = a.alpha;
    opt.max_iters = a.max_iters;
    opt.tol = a.tol;
    opt.essential_cap = a.essential_cap;
    opt.metric = metric;
    const DistanceResult r = sinkhorn(da, db, opt);
    rec["distance"] = r.distance;
    rec["converged"] = r.converged;
    rec["iters"] = r.iters;
    if (!r.converged)
      std::cerr << "warning: sinkhorn stopped after " << r.iters << " iterations with marginal violation "
                << r.marginal_violation << "\n";
  }
  std::cout << rec.dump() << "\n";
  rec["config"] = cfg;
  const fs::path dir = prepare_out(c);
  write_text(dir / a.out, json_text(rec));
  return kOk;
}

struct LifetimesArgs {
  std::vector<std::string> inputs;
  std::size_t bins = 20;
  std::optional<double> bin_width;
  std::string out = "lifetimes.csv";
};

int cmd_lifetimes(const CLI::App& sub, const Common& c, const LifetimesArgs& a) {
  const json cfg = config_echo(sub);
  if (a.bins < 1) throw std::invalid_argument("--bins must be >= 1");
  if (a.bin_width && !(*a.bin_width > 0.0)) throw std::invalid_argument("--bin-width must be positive");
  std::vector<PersistenceDiagram> ds;
  for (const auto& path : a.inputs) ds.push_back(read_diagram_json(path));
  const auto stats = stats_for(ds, a.bins, a.bin_width);
  const fs::path dir = prepare_out(c);
  write_text(dir / a.out, lifetime_csv_text(stats, cfg));
  for (std::size_t i = 0; i < stats.size(); ++i) {
    std::vector<double> counts(stats[i].histogram.begin(), stats[i].histogram.end());
    const std::string stem = fs::path(a.inputs[i]).stem().string();
    write_text(dir / ("lifetimes_" + std::to_string(i) + "_" + stem + ".svg"),
               svg_with_config(svg::histogram("dim " + std::to_string(stats[i].dim) + " lifetimes: " + stem, counts,
                                              stats[i].bin_width),
                               cfg));
  }
  return kOk;
}

struct OptimizeArgs {
  Source source;
  std::string functional = "total-persistence";
  std::string direction = "minimize";
  std::vector<int> hom_dims{1};
  std::vector<double> weights;
  std::vector<std::string> targets;
  double p = 1.0, q = 0.0;
  std::size_t i0 = 0;
  std::optional<double> alpha;
  std::string metric = "linf";
  double lr = 0.01;
  std::size_t steps = 100;
  std::size_t record_every = 1;
  std::string snapshot_dir;
};

int cmd_optimize(const CLI::App& sub, const Common& c, const OptimizeArgs& a) {
  const json cfg = config_echo(sub);
  if (a.hom_dims.empty()) throw std::invalid_argument("--hom-dim needs at least one dimension");
  if (!a.weights.empty() && a.weights.size() != a.hom_dims.size())
    throw std::invalid_argument("--weights must give one weight per --hom-dim");
  const bool wasserstein = a.functional == "wasserstein";
  if (wasserstein && a.targets.size() != a.hom_dims.size())
    throw std::invalid_argument("wasserstein needs one --target diagram per --hom-dim");

  const Direction dir = a.direction == "maximize" ? Direction::Maximize : Direction::Minimize;
  std::vector<WeightedFunctional> terms;
  for (std::size_t t = 0; t < a.hom_dims.size(); ++t) {
    DiagramFunctional f;
    f.direction = dir;
    if (wasserstein) {
      WassersteinToTarget w;
      w.target = read_diagram_json(a.targets[t]);
      w.dim = a.hom_dims[t];
      w.alpha = a.alpha;
      w.metric = parse_metric(a.metric);
      f.kind = std::move(w);
    } else {
      f.kind = TotalPersistence{a.p, a.q, a.i0, a.hom_dims[t]};
    }
    terms.push_back({std::move(f), a.weights.empty() ? 1.0 : a.weights[t]});
  }
  const PointCloud start = load_source(a.source, c.seed);

  OptimizeOptions opt;
  opt.lr = a.lr;
  opt.steps = a.steps;
  opt.record_every = a.record_every;
  opt.grad.max_dim = c.max_dim;
  opt.grad.max_radius = c.radius();
  const bool single = terms.size() == 1 && terms[0].weight == 1.0;
  const OptimizeResult res = single ? optimize(start, terms[0].functional, opt) : optimize(start, terms, opt);

  const fs::path out = prepare_out(c);
  std::ostringstream traj;
  write_trajectory_csv(traj, res.trajectory, cfg);
  write_text(out / "trajectory.csv", traj.str());
  std::vector<double> xs, ys;
  for (const auto& tp : res.trajectory) {
    xs.push_back(static_cast<double>(tp.step));
    ys.push_back(tp.value);
  }
  write_text(out / "value.svg", svg_with_config(svg::line_chart("objective value", xs, ys), cfg));
  if (!res.trajectory.empty()) write_text(out / "final_cloud.csv", cloud_csv(res.trajectory.back().cloud, cfg));
  if (!a.snapshot_dir.empty()) {
    const fs::path snap = out / a.snapshot_dir;
    std::error_code ec;
    fs::create_directories(snap, ec);
    if (ec) throw IoError("cannot create " + snap.string() + ": " + ec.message());
    for (const auto& tp : res.trajectory) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%06zu.csv", tp.step);
      write_text(snap / name, cloud_csv(tp.cloud, cfg));
    }
  }
  if (res.diverged) {
    std::cerr << "error: optimization diverged: " << res.failure << " (trajectory kept up to step "
              << (res.trajectory.empty() ? 0 : res.trajectory.back().step) << ")\n";
    return kNumerical;
  }
  return kOk;
}

struct ExpArgs {
  std::string images;
  std::size_t synthetic_count = 1000;
  std::size_t n = 200;
  std::size_t crop = 10;
  double noise_sd = 0.1;
  std::size_t repeats = 5;
  std::size_t bins = 20;
  std::vector<std::string> conditions;
  std::string metric = "linf";
  bool same_samples = false;
};

void add_exp_options(CLI::App* sub, ExpArgs& e) {
  sub->add_option("--images", e.images, "IDX image file; synthetic structured-center images if omitted");
  sub->add_option("--synthetic-count", e.synthetic_count, "number of synthetic images when --images is omitted");
  sub->add_option("--n", e.n, "images per sample");
  sub->add_option("--crop", e.crop, "crop size in pixels");
  sub->add_option("--noise-sd", e.noise_sd, "Gaussian pixel noise on [0,1] intensities");
  sub->add_option("--repeats", e.repeats, "Monte-Carlo repeats");
}

ExperimentConfig exp_config(const Common& c, const ExpArgs& e, std::vector<Condition> conds) {
  ExperimentConfig x;
  x.n = e.n;
  x.crop_size = e.crop;
  x.noise_sd = e.noise_sd;
  x.repeats = e.repeats;
  x.seed = c.seed;
  x.max_dim = c.max_dim;
  x.max_radius = c.radius();
  x.bins = e.bins;
  x.conditions = std::move(conds);
  x.metric = parse_metric(e.metric);
  x.same_samples = e.same_samples;
  return x;
}

ImageSet exp_images(const Common& c, const ExpArgs& e) {
  if (!e.images.empty()) return read_idx(e.images);
  return gen_structured_center_images(e.synthetic_count, derive_seed(c.seed, 0xD1CE));
}

int cmd_exp1(const CLI::App& sub, const Common& c, const ExpArgs& e) {
  const json cfg = config_echo(sub);
  const ImageSet images = exp_images(c, e);
  const Exp1Report rep = run_exp1(images, exp_config(c, e, {Condition::Center, Condition::Corner}));
  const fs::path out = prepare_out(c);
  write_text(out / "exp1_report.json", json_text(exp1_to_json(rep, cfg)));
  for (const auto& cond : rep.conditions)
    for (int k = 0; k < c.max_dim; ++k) {
      const std::string name = condition_name(cond.condition);
      write_text(out / ("exp1_" + name + "_dim" + std::to_string(k) + ".svg"),
                 svg_with_config(svg::histogram(name + " crop, dim " + std::to_string(k) + " lifetimes (all repeats)",
                                                cond.pooled_histogram(k), rep.bin_width[static_cast<std::size_t>(k)]),
                                 cfg));
    }
  return kOk;
}

int cmd_exp2(const CLI::App& sub, const Common& c, const ExpArgs& e) {
  const json cfg = config_echo(sub);
  std::vector<Condition> conds;
  for (const auto& s : e.conditions) conds.push_back(parse_condition(s));
  const ImageSet images = exp_images(c, e);
  const Exp2Report rep = run_exp2(images, exp_config(c, e, conds));
  const fs::path out = prepare_out(c);
  write_text(out / "exp2_report.json", json_text(exp2_to_json(rep, cfg)));
  std::ostringstream csv;
  write_config_comment(csv, cfg);
  csv << "condition,dim,mean_distance,variance,sd\n";
  for (const auto& cond : rep.conditions)
    for (const auto& s : cond.summary)
      csv << condition_name(cond.condition) << ',' << s.dim << ',' << format_double(s.mean) << ','
          << (std::isfinite(s.variance) ? format_double(s.variance) : "") << ','
          << (std::isfinite(s.sd) ? format_double(s.sd) : "") << '\n';
  write_text(out / "exp2_summary.csv", csv.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topokit: Vietoris-Rips persistence, diagram distances and topology optimization"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  Common common;

  auto* gen = app.add_subcommand("gen", "generate a point cloud CSV or a synthetic IDX image set");
  GenSpec gen_spec;
  std::string gen_out;
  add_common(gen, common);
  add_gen_options(gen, gen_spec, true);
  gen->add_option("--out", gen_out, "output file name inside --out-dir");

  auto* ingest = app.add_subcommand("ingest", "crop sampled IDX images into a point cloud CSV");
  IngestArgs ingest_args;
  add_common(ingest, common);
  ingest->add_option("--images", ingest_args.images, "IDX image file")->required();
  ingest->add_option("--region", ingest_args.region, "center or corner")->check(CLI::IsMember({"center", "corner"}));
  ingest->add_option("--crop", ingest_args.crop, "crop size in pixels");
  ingest->add_option("--n", ingest_args.n, "images to sample");
  ingest->add_option("--noise-sd", ingest_args.noise_sd, "Gaussian pixel noise on [0,1] intensities");
  ingest->add_flag("--shuffle", ingest_args.shuffle, "shuffle each point's coordinates");
  ingest->add_option("--out", ingest_args.out, "output file name inside --out-dir");

  auto* persist = app.add_subcommand("persist", "persistence diagrams and lifetime statistics of a cloud");
  PersistArgs persist_args;
  add_common(persist, common);
  add_source(persist, persist_args.source);
  persist->add_option("--bins", persist_args.bins, "lifetime histogram bins");
  persist->add_flag("--essential", persist_args.essential, "keep essential classes in diagram files");
  persist->add_flag("--zero", persist_args.zero, "keep zero-persistence pairs in diagram files");

  auto* distance = app.add_subcommand("distance", "distance between two diagram files");
  DistanceArgs dist_args;
  add_common(distance, common);
  distance->add_option("--a", dist_args.a, "first diagram JSON")->required();
  distance->add_option("--b", dist_args.b, "second diagram JSON")->required();
  distance->add_option("--method", dist_args.method, "exact, sinkhorn or bottleneck")
      ->check(CLI::IsMember({"exact", "sinkhorn", "bottleneck"}));
  distance->add_option("--alpha", dist_args.alpha, "sinkhorn regularization")->check(CLI::PositiveNumber);
  distance->add_option("--max-iters", dist_args.max_iters, "sinkhorn iteration budget");
  distance->add_option("--tol", dist_args.tol, "sinkhorn marginal tolerance")->check(CLI::PositiveNumber);
  distance->add_option("--essential-cap", dist_args.essential_cap, "replace infinite deaths with this value");
  distance->add_option("--metric", dist_args.metric, "ground metric: linf or l2")->check(CLI::IsMember({"linf", "l2"}));
  distance->add_option("--out", dist_args.out, "output file name inside --out-dir");

  auto* lifetimes = app.add_subcommand("lifetimes", "lifetime statistics and histograms of diagram files");
  LifetimesArgs life_args;
  add_common(lifetimes, common);
  lifetimes->add_option("--input", life_args.inputs, "diagram JSON files")->required();
  lifetimes->add_option("--bins", life_args.bins, "histogram bins");
  lifetimes->add_option("--bin-width", life_args.bin_width, "fixed bin width (default: max lifetime / bins)");
  lifetimes->add_option("--out", life_args.out, "CSV file name inside --out-dir");

  auto* optimize_cmd = app.add_subcommand("optimize", "gradient steps on a point cloud for a diagram functional");
  OptimizeArgs opt_args;
  add_common(optimize_cmd, common);
  add_source(optimize_cmd, opt_args.source);
  optimize_cmd->add_option("--functional", opt_args.functional, "total-persistence or wasserstein")
      ->check(CLI::IsMember({"total-persistence", "wasserstein"}));
  optimize_cmd->add_option("--direction", opt_args.direction, "minimize or maximize")
      ->check(CLI::IsMember({"minimize", "maximize"}));
  optimize_cmd->add_option("--hom-dim", opt_args.hom_dims, "homology dimension(s), one term each")->delimiter(',');
  optimize_cmd->add_option("--weights", opt_args.weights, "per-term weights (default 1)")->delimiter(',');
  optimize_cmd->add_option("--target", opt_args.targets, "target diagram JSON per term (wasserstein)")->delimiter(',');
  optimize_cmd->add_option("--p", opt_args.p, "total persistence: lifetime exponent");
  optimize_cmd->add_option("--q", opt_args.q, "total persistence: midpoint exponent");
  optimize_cmd->add_option("--i0", opt_args.i0, "total persistence: skip this many most persistent points");
  optimize_cmd->add_option("--alpha", opt_args.alpha, "wasserstein: use sinkhorn with this regularization");
  optimize_cmd->add_option("--metric", opt_args.metric, "ground metric: linf or l2")->check(CLI::IsMember({"linf", "l2"}));
  optimize_cmd->add_option("--lr", opt_args.lr, "step size");
  optimize_cmd->add_option("--steps", opt_args.steps, "number of gradient steps");
  optimize_cmd->add_option("--record-every", opt_args.record_every, "trajectory sampling interval");
  optimize_cmd->add_option("--snapshot-dir", opt_args.snapshot_dir, "write recorded clouds to this subdirectory");

  auto* exp1 = app.add_subcommand("exp1", "lifetimes of center vs corner image crops");
  ExpArgs exp1_args;
  add_common(exp1, common);
  add_exp_options(exp1, exp1_args);
  exp1->add_option("--bins", exp1_args.bins, "lifetime histogram bins");

  auto* exp2 = app.add_subcommand("exp2", "diagram distances between two disjoint samples per crop condition");
  ExpArgs exp2_args;
  exp2_args.conditions = {"center", "corner", "shuffle"};
  add_common(exp2, common);
  add_exp_options(exp2, exp2_args);
  exp2->add_option("--conditions", exp2_args.conditions, "any of center, corner, shuffle")
      ->delimiter(',')
      ->check(CLI::IsMember({"center", "corner", "shuffle"}));
  exp2->add_option("--metric", exp2_args.metric, "ground metric: linf or l2")->check(CLI::IsMember({"linf", "l2"}));
  exp2->add_flag("--same-samples", exp2_args.same_samples, "compare a sample with itself (test hook)");

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(args);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_gen(*gen, common, gen_spec, gen_out);
    if (*ingest) return cmd_ingest(*ingest, common, ingest_args);
    if (*persist) return cmd_persist(*persist, common, persist_args);
    if (*distance) return cmd_distance(*distance, common, dist_args);
    if (*lifetimes) return cmd_lifetimes(*lifetimes, common, life_args);
    if (*optimize_cmd) return cmd_optimize(*optimize_cmd, common, opt_args);
    if (*exp1) return cmd_exp1(*exp1, common, exp1_args);
    if (*exp2) return cmd_exp2(*exp2, common, exp2_args);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  return kConfig;
}
