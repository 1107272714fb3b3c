// Persistence of a noisy circle, its distance to a clean one, and a few
// gradient steps pulling a blob toward the circle's H1 diagram.

#include <cstdio>

#include "topokit/topokit.hpp"

using namespace topokit;

int main() {
  const PointCloud clean = gen_circle(40, 1.0, 0.0, 1);
  const PointCloud noisy = gen_circle(40, 1.0, 0.05, 2);

  const PersistenceDiagram h1_clean = diagram(compute_persistence(clean).pairs, 1);
  const PersistenceDiagram h1_noisy = diagram(compute_persistence(noisy).pairs, 1);
  for (const auto& p : h1_noisy.points) std::printf("noisy H1 point (%.4f, %.4f)\n", p.birth, p.death);

  std::printf("W1 = %.6f\n", wasserstein_exact(h1_clean, h1_noisy).distance);
  std::printf("bottleneck = %.6f\n", bottleneck(h1_clean, h1_noisy));
  std::printf("sinkhorn(alpha=0.01) = %.6f\n", sinkhorn(h1_clean, h1_noisy, {}).distance);

  DiagramFunctional loss;
  loss.kind = WassersteinToTarget{h1_clean, 1, std::nullopt, GroundMetric::LInf};
  OptimizeOptions opt;
  opt.lr = 0.05;
  opt.steps = 100;
  opt.record_every = 20;
  const OptimizeResult run = optimize(gen_gaussian_blob(40, 2, 1.0, 1), loss, opt);
  for (const auto& t : run.trajectory) std::printf("step %zu  loss %.6f\n", t.step, t.value);
  return run.diverged ? 1 : 0;
}
