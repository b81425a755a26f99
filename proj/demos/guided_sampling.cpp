// Classifier-guided sampling on the cosine schedule.
//
// The base model is a linear-state toy; the "classifier" pulls samples towards a target point.
// Prints the final state for a few guidance scales.

#include <cstdio>

#include "scire/scire.hpp"

int main() {
  using namespace scire;

  const auto schedule = NoiseSchedule::cosine();
  SyntheticModel base(LinearStateEps{0.8}, schedule);
  const Vector target{1.5, -0.5};

  // grad_x log p(y | x) for a Gaussian classifier centred on `target`.
  auto grad = [&](VectorView x, double) { return vec::sub(target, x); };

  SolverConfig cfg;
  cfg.method = Method::Agile;
  cfg.nfe_budget = 20;
  cfg.trajectory.kind = TrajectoryKind::LogNSR;
  cfg.trajectory.t_start = schedule.t_max();
  cfg.trajectory.t_end = 1e-3;

  GaussianSource rng(5);
  const Vector x_init = rng.vector(2);

  for (double scale : {0.0, 0.25, 0.5}) {
    auto guided = guided_model(base, grad, scale, schedule);
    const auto result = sample(cfg, *guided, schedule, x_init);
    std::printf("scale=%-4g nfe=%d x=(%+.6f, %+.6f)\n", scale, result.nfe, result.x_final[0], result.x_final[1]);
  }
  return 0;
}
