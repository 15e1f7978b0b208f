// Finds the smallest constant C whose n_eff reaches a 0.9 exact-recovery rate
// on the reference planted suite. Run once; the result is frozen in recovery.hpp.

#include <cstdio>
#include <cstdlib>

#include "songoku/recovery.hpp"

int main(int argc, char** argv) {
  using namespace songoku;
  const std::size_t trials = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 500;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 20251;

  PlantedSpec spec;  // K=8 d=32 tau=.5 gamma=.3 sigma=1 m0=1
  spec.seed = 7;
  const PlantedTaskSuite suite = make_planted_suite(spec);
  const double delta = 0.1;

  auto rate_at = [&](double c) {
    const double n = required_neff(c, spec.sigma, spec.m0, spec.gamma, spec.tasks, delta);
    const EmaPlan plan = ema_plan_for(n);
    const auto res = recovery_experiment(suite, plan, spec.tau, trials, seed);
    std::printf("C=%-10.5f n_eff=%-10.3f beta=%.6f R=%zu rate=%.3f [%.3f, %.3f]\n", c, plan.n_eff,
                plan.beta, plan.window, res.rate(), res.lower(), res.upper());
    return res.rate();
  };

  // smallest C on a 0.25 grid whose Wilson lower bound clears 0.9
  double c = 0.25;
  while (true) {
    const double n = required_neff(c, spec.sigma, spec.m0, spec.gamma, spec.tasks, delta);
    const auto res = recovery_experiment(suite, ema_plan_for(n), spec.tau, trials, seed);
    std::printf("C=%-6.2f n_eff=%-9.3f rate=%.3f lower=%.3f\n", c, n, res.rate(), res.lower());
    if (res.lower() >= 0.9) break;
    c += 0.25;
  }
  const double hi = c;
  std::printf("calibrated C = %.4f\n", hi);
  std::printf("control at C/100: ");
  rate_at(hi / 100.0);
  return 0;
}
