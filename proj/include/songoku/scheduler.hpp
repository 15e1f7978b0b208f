#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "songoku/combinators.hpp"
#include "songoku/conflict_graph.hpp"
#include "songoku/grad_stats.hpp"
#include "songoku/matrix.hpp"
#include "songoku/rng.hpp"
#include "songoku/run_record.hpp"
#include "songoku/sketch.hpp"

namespace songoku {

/// Invalid configuration value; names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class StepRule { kConstant, kInverseSqrtT };
enum class ClassSelection { kCyclic, kRandomScaled };

std::string to_string(StepRule rule);
std::string to_string(ClassSelection sel);

struct AnnealCurve {
  double curvature = 9.0;
  std::size_t horizon = 0;  // 0: four refresh periods
};

struct SchedulerConfig {
  double tau_star = 0.5;
  std::size_t warmup = 0;
  AnnealCurve anneal;
  std::size_t refresh_period = 32;
  double beta = 0.9;
  double norm_floor = GradStats::kDefaultNormFloor;
  std::size_t f_min = 1;
  StepRule step_rule = StepRule::kConstant;
  double step_size = 0.01;  // eta, or c in c / sqrt(T)
  std::size_t total_steps = 0;
  std::uint64_t seed = 0;
  bool permute_classes = false;
  ClassSelection selection = ClassSelection::kCyclic;
  bool freeze_first_coloring = false;
  SketchConfig sketch;
  CombinatorConfig combinator;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  std::size_t anneal_horizon() const {
    return anneal.horizon > 0 ? anneal.horizon : 4 * refresh_period;
  }
  /// Step size at step t (the rules used here do not depend on t).
  double eta() const;
};

/// Source of per-task gradients for the training loop.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual std::size_t tasks() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::size_t head_dim() const { return 0; }

  /// Called once at the start of every step before any gradient request.
  virtual void begin_step(std::size_t /*step*/) {}

  /// Stochastic gradient of task `task` w.r.t. shared (g) and head (h) params.
  virtual void gradient(std::size_t task, std::span<const double> theta,
                        std::span<const double> head, Rng& rng, std::span<double> g,
                        std::span<double> h) = 0;

  /// Fresh probe gradient for the refresh. Defaults to a regular sample.
  virtual void probe(std::size_t task, std::span<const double> theta,
                     std::span<const double> head, Rng& rng, std::span<double> g);

  /// Total objective at the current parameters.
  virtual double loss(std::span<const double> theta, const std::vector<Vector>& heads) const = 0;

  /// ||grad_theta F||^2 when the oracle knows it exactly; negative otherwise.
  virtual double full_gradient_norm_sq(std::span<const double> /*theta*/,
                                       const std::vector<Vector>& /*heads*/) const {
    return -1.0;
  }

  virtual Vector initial_theta() const { return Vector(dim(), 0.0); }
};

struct TaskGradient {
  std::size_t task = 0;
  Vector shared;
  Vector head;
};

struct SchedulerState {
  SchedulerState(const SchedulerConfig& cfg, std::size_t tasks, std::size_t dim,
                 std::size_t head_dim);

  std::size_t round = 0;
  std::size_t round_start = 0;
  double tau = 1.0;
  AugmentedSchedule schedule;
  ConflictGraph graph;
  GradStats stats;
  Vector theta;
  std::vector<Vector> heads;
  bool frozen = false;
  GraphBuilder builder;
  Rng rng;

  std::size_t tasks() const { return stats.tasks(); }
  std::size_t period() const { return schedule.period(); }
};

/// 1 during warm-up, then 1 - (1 - tau*) ln(1 + a u) / ln(1 + a) with
/// u = min((t - T_warm) / S, 1).
double anneal_tau(std::size_t t, const SchedulerConfig& cfg);

/// Slot ((t - t_r) mod m) of the current schedule, ascending task order.
std::vector<std::size_t> active_set(const SchedulerState& state, std::size_t t);

/// theta -= eta * sum g_k; phi_k -= eta * h_k for active k only. Throws if a
/// gradient is missing, duplicated, or supplied for an inactive task.
void apply_update(SchedulerState& state, std::span<const std::size_t> active,
                  std::span<const TaskGradient> grads, double eta);

/// Fold probe gradients (K x d) into every EMA row, rebuild the graph at the
/// state's current tau, color it, apply minimum coverage, and open a new
/// window at `next_start`. Returns the window record.
WindowRecord refresh(SchedulerState& state, const SchedulerConfig& cfg, const Matrix& probes,
                     std::size_t next_start);

/// Full training loop. Deterministic given cfg.seed and a deterministic oracle.
RunRecord run(const SchedulerConfig& cfg, GradientOracle& oracle);

}  // namespace songoku
