#pragma once

// Separable multi-task logistic regression used for the decay-rate check.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "songoku/matrix.hpp"
#include "songoku/scheduler.hpp"

namespace songoku {

struct LogisticTask {
  Matrix x;  // n x d
  Vector y;  // +-1
};

struct LogisticSpec {
  std::size_t tasks = 4;
  std::size_t dim = 8;
  std::size_t points = 20;
  double offset_scale = 1.0;  // per-task shift of the inputs
  double margin = 0.3;        // |<w*, x>| >= margin for every point
  std::uint64_t seed = 0;
};

/// All tasks are labelled by one hidden unit vector w*, so the union is
/// linearly separable. Loss per task is the mean logistic loss.
class LogisticOracle : public GradientOracle {
 public:
  explicit LogisticOracle(const LogisticSpec& spec);

  std::size_t tasks() const override { return tasks_.size(); }
  std::size_t dim() const override { return dim_; }
  void gradient(std::size_t task, std::span<const double> theta, std::span<const double> head,
                Rng& rng, std::span<double> g, std::span<double> h) override;
  double loss(std::span<const double> theta, const std::vector<Vector>& heads) const override;
  double full_gradient_norm_sq(std::span<const double> theta,
                               const std::vector<Vector>& heads) const override;

  /// sum_k lambda_max(X_k^T X_k / n) / 4.
  double smoothness() const { return smoothness_; }
  void task_gradient(std::size_t task, std::span<const double> theta, std::span<double> g) const;

 private:
  std::vector<LogisticTask> tasks_;
  std::size_t dim_ = 0;
  double smoothness_ = 0.0;
};

struct ConvergenceSpec {
  std::vector<std::size_t> horizons{100, 1000, 10000};
  std::size_t seeds = 20;
  double step_constant = 10.0;  // eta = step_constant / (L sqrt(T))
  SchedulerConfig scheduler;    // tau_star, R, beta, selection...
  LogisticSpec problem;
};

struct ConvergenceResult {
  std::vector<std::size_t> horizons;
  std::vector<double> mean_min_grad_sq;  // over seeds, of min_t ||grad F(theta_t)||^2
  double slope = 0.0;
  std::size_t runs = 0;
  bool monotone = false;
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

ConvergenceResult convergence_experiment(const ConvergenceSpec& spec);

}  // namespace songoku
