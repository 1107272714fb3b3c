// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/resource.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "oracle.hpp"
#include "topokit/topokit.hpp"

namespace fs = std::filesystem;
using namespace topokit;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

double max_entry(const DistanceMatrix& dm) {
  double m = 0.0;
  for (std::size_t i = 0; i < dm.size(); ++i)
    for (std::size_t j = i + 1; j < dm.size(); ++j) m = std::max(m, dm(i, j));
  return m;
}

PersistenceDiagram random_diagram(Rng& rng, std::size_t max_points) {
  PersistenceDiagram d{1, {}};
  const std::size_t m = 1 + rng.below(max_points);
  for (std::size_t i = 0; i < m; ++i) {
    const double b = rng.uniform();
    d.points.push_back({b, b + rng.uniform(0.01, 1.0)});
  }
  return d;
}

void square() {
  const auto t0 = Clock::now();
  const auto pr = compute_persistence(PointCloud::from_rows({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  const auto h1 = diagram(pr.pairs, 1);
  const auto h0 = diagram(pr.pairs, 0, true, true);
  bool ok = h1.size() == 1 && std::abs(h1.points[0].birth - 1.0) <= 1e-9 &&
            std::abs(h1.points[0].death - std::sqrt(2.0)) <= 1e-9;
  std::size_t unit = 0, essential = 0;
  for (const auto& p : h0.points) {
    if (p.essential() && p.birth == 0.0) ++essential;
    else if (p.birth == 0.0 && std::abs(p.death - 1.0) <= 1e-9) ++unit;
  }
  ok = ok && h0.size() == 4 && unit == 3 && essential == 1;
  const double t = seconds_since(t0);
  report(1, "square oracle", ok && t < 1.0,
         fmt("H1 %zu point(s), H0 %zu unit + %zu essential, %.4f s", h1.size(), unit, essential, t));
}

void brute_force() {
  const auto t0 = Clock::now();
  std::size_t checks = 0, mismatches = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(2024, seed));
    const std::size_t n = 3 + rng.below(6);
    const std::size_t dim = 2 + rng.below(3);
    const auto cloud = gen_gaussian_blob(n, dim, 1.0, derive_seed(7, seed));
    const auto dm = pairwise_distances(cloud);
    const double top = max_entry(dm);
    const auto pr = compute_persistence(dm, 3, top + 1.0);
    std::vector<double> eps;
    // half of them exact pairwise distances, where closed vs open thresholds differ
    for (int k = 0; k < 10; ++k) {
      const std::size_t i = rng.below(n);
      std::size_t j = rng.below(n - 1);
      if (j >= i) ++j;
      eps.push_back(dm(i, j));
    }
    for (int k = 0; k < 10; ++k) eps.push_back(rng.uniform(0.0, 1.1 * top));
    for (double e : eps) {
      const auto b = oracle::betti(dm, e, 2);
      for (int k = 0; k <= 2; ++k) {
        ++checks;
        if (betti_curve(pr.pairs, k, e) != b[static_cast<std::size_t>(k)]) ++mismatches;
      }
    }
  }
  const double t = seconds_since(t0);
  report(2, "brute-force equivalence", mismatches == 0 && t < 60.0,
         fmt("%zu/%zu Betti numbers agree, %.2f s", checks - mismatches, checks, t));
}

void circle() {
  const auto h1 = diagram(compute_persistence(gen_circle(60, 1.0, 0.0, 1)).pairs, 1);
  std::size_t big = 0, small = 0, other = 0;
  double death = 0.0, biggest = 0.0;
  for (const auto& p : h1.points) {
    if (p.lifetime() >= 1.0) {
      ++big;
      death = p.death;
      biggest = p.lifetime();
    } else if (p.lifetime() <= 0.2) {
      ++small;
    } else {
      ++other;
    }
  }
  report(3, "circle signal", big == 1 && other == 0 && death >= 1.60 && death <= 1.75,
         fmt("%zu long-lived point (lifetime %.4f, death %.4f), %zu short, %zu in between", big, biggest, death, small,
             other));
}

void stability() {
  std::size_t trials = 0, violations = 0;
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const double delta = t % 2 ? 0.05 : 0.01;
    const auto x = gen_circle(40, 1.0, 0.1, derive_seed(31, t));
    const auto y = perturb(x, delta, derive_seed(32, t));
    const double r = std::max(max_entry(pairwise_distances(x)), max_entry(pairwise_distances(y))) + 1.0;
    const auto px = compute_persistence(x, 2, r), py = compute_persistence(y, 2, r);
    for (int k = 0; k <= 1; ++k) {
      const double b = bottleneck(diagram(px.pairs, k), diagram(py.pairs, k));
      worst = std::max(worst, b / (2.0 * delta));
      if (b > 2.0 * delta + 1e-12) ++violations;
    }
    ++trials;
  }
  report(4, "stability", violations == 0,
         fmt("%zu trials, %zu violations, largest bottleneck / 2delta = %.3f", trials, violations, worst));
}

void metric_axioms() {
  Rng rng(404);
  double asym = 0.0, tri = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto a = random_diagram(rng, 30), b = random_diagram(rng, 30), c = random_diagram(rng, 30);
    const double ab = wasserstein_exact(a, b).distance, ba = wasserstein_exact(b, a).distance;
    const double bc = wasserstein_exact(b, c).distance, ac = wasserstein_exact(a, c).distance;
    asym = std::max(asym, std::abs(ab - ba));
    tri = std::max(tri, ac - (ab + bc));
  }
  report(5, "metric axioms", asym <= 1e-12 && tri <= 1e-9,
         fmt("max |W(a,b)-W(b,a)| = %.3g, max triangle excess = %.3g over 200 triples", asym, tri));
}

void sinkhorn_fidelity() {
  Rng rng(505);
  double worst = 0.0, worst_rise = 0.0;
  std::size_t unconverged = 0;
  for (int t = 0; t < 50; ++t) {
    const auto a = random_diagram(rng, 30), b = random_diagram(rng, 30);
    const double exact = wasserstein_exact(a, b).distance;
    double prev = INFINITY, last_err = 0.0;
    for (double alpha : {0.1, 0.05, 0.01, 0.005}) {
      SinkhornOptions opt;
      opt.alpha = alpha;
      const auto r = sinkhorn(a, b, opt);
      if (!r.converged) ++unconverged;
      const double err = std::abs(r.distance - exact) / exact;
      if (std::isfinite(prev)) worst_rise = std::max(worst_rise, err - prev);
      prev = err;
      last_err = err;
    }
    worst = std::max(worst, last_err);
  }
  report(6, "sinkhorn fidelity", worst <= 0.05 && worst_rise <= 1e-6 && unconverged == 0,
         fmt("worst relative error at alpha=0.005: %.4f, largest error increase as alpha shrinks: %.3g, %zu unconverged",
             worst, worst_rise, unconverged));
}

std::vector<std::pair<Index, Index>> pairing(const PointCloud& c) {
  std::vector<std::pair<Index, Index>> out;
  for (const auto& p : compute_persistence(c).pairs) out.push_back({p.creator, p.destroyer});
  return out;
}

PointCloud shifted(const PointCloud& c, std::size_t idx, double h) {
  std::vector<double> x = c.coords();
  x[idx] += h;
  return PointCloud(c.size(), c.dim(), std::move(x));
}

void gradients() {
  const double h = 1e-5;
  std::size_t instances = 0, coords = 0, skipped = 0, bad = 0;
  std::size_t per_dim[2] = {0, 0};
  double worst = 0.0;
  Rng rng(606);
  for (std::uint64_t seed = 0; instances < 60 && seed < 500; ++seed) {
    const auto c = gen_gaussian_blob(10 + rng.below(6), 2 + rng.below(2), 1.0, derive_seed(66, seed));
    const int dim = static_cast<int>(seed % 2);
    DiagramFunctional f;
    f.kind = TotalPersistence{1.0 + static_cast<double>(rng.below(2)), static_cast<double>(rng.below(2)), 0, dim};
    const auto g = grad(c, f);
    if (g.diagram.empty()) continue;
    const auto base = pairing(c);
    for (std::size_t k = 0; k < c.coords().size(); ++k) {
      const auto up = shifted(c, k, h), down = shifted(c, k, -h);
      // a step that changes the pairing crosses a kink; the derivative does not exist there
      if (pairing(up) != base || pairing(down) != base) {
        ++skipped;
        continue;
      }
      const double fd = (grad(up, f).value - grad(down, f).value) / (2 * h);
      const double an = g.grad.values[k];
      const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8});
      worst = std::max(worst, rel);
      if (rel > 1e-4) ++bad;
      ++coords;
    }
    ++instances;
    ++per_dim[dim];
  }
  report(7, "gradient correctness", instances >= 50 && per_dim[0] > 0 && per_dim[1] > 0 && bad == 0,
         fmt("%zu instances (%zu dim 0, %zu dim 1), %zu coordinates, worst relative error %.2g, %zu over 1e-4, "
             "%zu coordinates skipped at pairing changes",
             instances, per_dim[0], per_dim[1], coords, worst, bad, skipped));
}

void optimization_direction() {
  const auto target = diagram(compute_persistence(gen_circle(40, 1.0, 0.0, 1)).pairs, 1);
  DiagramFunctional loss;
  loss.kind = WassersteinToTarget{target, 1, std::nullopt, GroundMetric::LInf};
  OptimizeOptions opt;
  opt.lr = 0.05;
  opt.steps = 200;
  opt.record_every = 200;
  const auto a = optimize(gen_gaussian_blob(40, 2, 1.0, 1), loss, opt);
  const double a0 = a.trajectory.front().value, a1 = a.trajectory.back().value;
  const double drop = (a0 - a1) / a0;

  DiagramFunctional tp;
  tp.kind = TotalPersistence{1.0, 0.0, 0, 1};
  tp.direction = Direction::Maximize;
  opt.lr = 0.01;
  opt.steps = 100;
  opt.record_every = 100;
  const auto b = optimize(gen_circle(40, 1.0, 0.05, 1), tp, opt);
  const double b0 = b.trajectory.front().value, b1 = b.trajectory.back().value;
  const double rise = (b1 - b0) / b0;

  report(8, "optimization direction",
         !a.diverged && !b.diverged && a.trajectory.back().step == 200 && b.trajectory.back().step == 100 &&
             drop >= 0.5 && rise >= 0.3,
         fmt("W1 loss %.4f -> %.4f (drop %.1f%%, need 50%%); total persistence %.4f -> %.4f (rise %.1f%%, need 30%%)",
             a0, a1, 100 * drop, b0, b1, 100 * rise));
}

void experiment1() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.conditions = {Condition::Center, Condition::Corner};
  const auto images = gen_structured_center_images(1000, derive_seed(0, 0xD1CE));
  const auto rep = run_exp1(images, cfg);
  std::size_t wins = 0;
  std::string means;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const double c = rep.conditions[0].repeats[r][1].mean_lifetime;
    const double k = rep.conditions[1].repeats[r][1].mean_lifetime;
    if (c > k) ++wins;
    means += fmt("%s%.4f/%.4f", r ? " " : "", c, k);
  }
  report(9, "experiment-1 direction", wins == cfg.repeats,
         fmt("center > corner mean H1 lifetime in %zu/%zu repeats (center/corner: %s), %.1f s", wins, cfg.repeats,
             means.c_str(), seconds_since(t0)));
}

void performance() {
  const auto cloud = gen_gaussian_blob(200, 100, 1.0, 1);
  const auto t0 = Clock::now();
  const auto pr = compute_persistence(cloud, 2);
  const double t = seconds_since(t0);
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  const double gb = static_cast<double>(ru.ru_maxrss) / (1024.0 * 1024.0);  // ru_maxrss is in KiB
  report(10, "performance anchor", t < 60.0 && gb < 4.0,
         fmt("n=200 in R^100: %zu simplices, %zu pairs, %.2f s, peak RSS %.3f GB", pr.filtration.size(), pr.pairs.size(), t,
             gb));
}

int run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" TOPOKIT_CLI "' " + args + " > stdout.txt 2> stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void determinism() {
  const std::vector<std::string> script = {
      "gen --kind circle --n 40 --noise-sd 0.05 --seed 3 --out circle.csv",
      "gen --kind blob --n 40 --dim 2 --seed 4 --out blob.csv",
      "gen --kind images --n 60 --seed 5 --out images.idx",
      "ingest --images images.idx --n 50 --region center --noise-sd 0.1 --seed 6 --out center.csv",
      "ingest --images images.idx --n 50 --region corner --shuffle --seed 6 --out shuffled.csv",
      "persist --input circle.csv --out-dir pc",
      "persist --input blob.csv --out-dir pb",
      "persist --generate disk-holes --n 120 --seed 7 --max-dim 3 --out-dir pd",
      "distance --a pc/diagram_dim1.json --b pb/diagram_dim1.json --out d_exact.json",
      "distance --a pc/diagram_dim1.json --b pb/diagram_dim1.json --method sinkhorn --out d_sinkhorn.json",
      "distance --a pc/diagram_dim1.json --b pb/diagram_dim1.json --method bottleneck --out d_bottleneck.json",
      "lifetimes --input pc/diagram_dim1.json --input pb/diagram_dim1.json --bins 10",
      "optimize --input blob.csv --functional wasserstein --target pc/diagram_dim1.json --hom-dim 1 --lr 0.05 "
      "--steps 20 --record-every 5 --snapshot-dir snaps --out-dir opt",
      "optimize --input circle.csv --functional total-persistence --direction maximize --hom-dim 0,1 "
      "--weights 0.5,1 --steps 10 --out-dir opt2",
      "exp1 --n 40 --repeats 2 --synthetic-count 100 --seed 8 --out-dir e1",
      "exp2 --n 30 --repeats 2 --synthetic-count 100 --seed 9 --conditions center,corner,shuffle --out-dir e2",
  };
  const fs::path root = fs::temp_directory_path() / ("topokit_acceptance_" + std::to_string(::getpid()));
  const fs::path a = root / "a", b = root / "b";
  fs::remove_all(root);
  fs::create_directories(a);
  fs::create_directories(b);
  std::set<std::string> commands;
  std::string failed;
  for (const auto& line : script) {
    commands.insert(line.substr(0, line.find(' ')));
    for (const auto& dir : {a, b})
      if (run_cli(dir, line) != 0) failed += " [" + line.substr(0, line.find(' ')) + "]";
  }
  std::size_t compared = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    const auto ext = e.path().extension();
    if (!e.is_regular_file() || (ext != ".csv" && ext != ".json")) continue;
    const auto rel = fs::relative(e.path(), a);
    ++compared;
    if (slurp(e.path()) != slurp(b / rel)) ++differing;
  }
  fs::remove_all(root);
  report(11, "determinism", failed.empty() && differing == 0 && commands.size() == 8 && compared > 20,
         fmt("%zu subcommands, %zu CSV/JSON files compared, %zu differ%s%s", commands.size(), compared, differing,
             failed.empty() ? "" : ", failed:", failed.c_str()));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {square,     brute_force,      circle,     stability,
                                                       metric_axioms, sinkhorn_fidelity, gradients, optimization_direction,
                                                       experiment1, performance,      determinism};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "exception", false, e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
