#include "songoku/recovery.hpp"

#include <cmath>

#include "songoku/conflict_graph.hpp"
#include "songoku/grad_stats.hpp"

namespace songoku {

namespace {

constexpr double kZ = 1.96;

}  // namespace

double ExperimentResult::lower() const {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials);
  const double p = rate();
  const double centre = p + kZ * kZ / (2 * n);
  const double spread = kZ * std::sqrt(p * (1 - p) / n + kZ * kZ / (4 * n * n));
  return (centre - spread) / (1 + kZ * kZ / n);
}

double ExperimentResult::upper() const {
  if (trials == 0) return 1.0;
  const double n = static_cast<double>(trials);
  const double p = rate();
  const double centre = p + kZ * kZ / (2 * n);
  const double spread = kZ * std::sqrt(p * (1 - p) / n + kZ * kZ / (4 * n * n));
  return (centre + spread) / (1 + kZ * kZ / n);
}

double required_neff(double c, double sigma, double m0, double gamma, std::size_t tasks,
                     double delta) {
  const double k = static_cast<double>(tasks);
  return c * sigma * sigma / (m0 * m0 * gamma * gamma) * std::log(k * k / delta);
}

EmaPlan ema_plan_for(double target_neff) {
  EmaPlan plan;
  if (target_neff <= 1.0) return plan;
  plan.window = static_cast<std::size_t>(std::ceil(2.0 * target_neff));
  double lo = 0.0;
  double hi = 1.0 - 1e-15;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (effective_sample_size(mid, plan.window) < target_neff)
      lo = mid;
    else
      hi = mid;
  }
  plan.beta = hi;
  plan.n_eff = effective_sample_size(plan.beta, plan.window);
  return plan;
}

bool recovery_trial(const PlantedTaskSuite& suite, double beta, std::size_t window, double tau,
                    Rng& rng) {
  GradStats stats(suite.tasks, suite.dim, beta);
  Vector g(suite.dim);
  for (std::size_t s = 0; s < window; ++s)
    for (std::size_t k = 0; k < suite.tasks; ++k) {
      sample_gradient(suite, k, rng, g);
      stats.update(k, g);
    }
  if (stats.included_count() < suite.tasks) return false;
  const ConflictGraph est = build_graph(interference_matrix(stats), tau);
  return est == suite.population_graph(tau);
}

ExperimentResult recovery_experiment(const PlantedTaskSuite& suite, const EmaPlan& plan,
                                     double tau, std::size_t trials, std::uint64_t seed) {
  ExperimentResult res;
  res.trials = trials;
  res.diagnostics.assign(trials, 0.0);
  const long n = static_cast<long>(trials);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    res.diagnostics[static_cast<std::size_t>(i)] =
        recovery_trial(suite, plan.beta, plan.window, tau, rng) ? 1.0 : 0.0;
  }
  for (double v : res.diagnostics) res.successes += v > 0.0 ? 1 : 0;
  return res;
}

}  // namespace songoku
