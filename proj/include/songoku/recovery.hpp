#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "songoku/planted.hpp"
#include "songoku/rng.hpp"

namespace songoku {

/// Sample-complexity constant for exact recovery, fixed once by
/// calibrate_recovery on the reference suite (K=8, d=32, tau=0.5, gamma=0.3,
/// sigma=1, m0=1, delta=0.1) and frozen here.
inline constexpr double kRecoveryConstant = 2.5;

struct ExperimentResult {
  std::size_t trials = 0;
  std::size_t successes = 0;
  std::vector<double> diagnostics;  // per trial

  double rate() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
  /// Wilson score interval at z = 1.96.
  double lower() const;
  double upper() const;
};

struct EmaPlan {
  double beta = 0.0;
  std::size_t window = 1;
  double n_eff = 1.0;
};

/// C sigma^2 / (m0^2 gamma^2) log(K^2 / delta).
double required_neff(double c, double sigma, double m0, double gamma, std::size_t tasks,
                     double delta);

/// Window R = ceil(2 n) and the beta that gives n_eff(beta, R) = n. Targets at
/// or below 1 give a single sample (beta = 0, R = 1).
EmaPlan ema_plan_for(double target_neff);

/// R EMA steps per task, then the empirical graph at tau compared with the
/// population graph. True on exact edge-set equality.
bool recovery_trial(const PlantedTaskSuite& suite, double beta, std::size_t window, double tau,
                    Rng& rng);

/// Independent trials with derived per-trial seeds; the count does not depend
/// on thread scheduling.
ExperimentResult recovery_experiment(const PlantedTaskSuite& suite, const EmaPlan& plan,
                                     double tau, std::size_t trials, std::uint64_t seed);

}  // namespace songoku
