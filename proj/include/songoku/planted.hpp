#pragma once

// Planted-partition task families with a known population conflict graph.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "songoku/conflict_graph.hpp"
#include "songoku/matrix.hpp"
#include "songoku/rng.hpp"
#include "songoku/scheduler.hpp"

namespace songoku {

class InfeasibleSuite : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PlantedSpec {
  std::size_t tasks = 8;
  std::size_t dim = 32;
  std::size_t groups = 2;
  double tau = 0.5;
  double gamma = 0.3;
  double sigma = 1.0;
  double m0 = 1.0;
  double within_cos = 0.0;  // 0: the smallest value that realises the margin
  std::uint64_t seed = 0;
  std::vector<std::size_t> group_of;  // empty: contiguous equal blocks
};

struct PlantedTaskSuite {
  std::size_t tasks = 0;
  std::size_t dim = 0;
  std::vector<std::size_t> group_of;
  Matrix mu;
  double sigma = 0.0;
  double tau = 0.5;
  double gamma = 0.0;
  double m0 = 1.0;
  std::uint64_t seed = 0;

  /// Edges between tasks whose population interference exceeds tau.
  ConflictGraph population_graph(double threshold) const;
  ConflictGraph population_graph() const { return population_graph(tau); }
};

struct MarginAudit {
  double max_cross_cos = -1.0;   // must be <= -(tau + gamma)
  double min_within_cos = 1.0;   // must be >= -(tau - gamma)
  double min_norm = 0.0;
  bool ok = false;
};

/// Group centres on a regular simplex (antipodal for two groups), each task a
/// tilt of its centre towards a private orthogonal direction. Within-group
/// cosine is c, cross-group cosine is -c / (g - 1). Throws InfeasibleSuite.
PlantedTaskSuite make_planted_suite(const PlantedSpec& spec);

MarginAudit audit_margins(const PlantedTaskSuite& suite);

/// mu_i + sigma * N(0, I).
Vector sample_gradient(const PlantedTaskSuite& suite, std::size_t task, Rng& rng);
void sample_gradient(const PlantedTaskSuite& suite, std::size_t task, Rng& rng,
                     std::span<double> out);

/// Plain text: header line "K d sigma tau gamma m0", then K lines of
/// "group mu_0 ... mu_{d-1}".
void write_suite(std::ostream& out, const PlantedTaskSuite& suite);
PlantedTaskSuite read_suite(std::istream& in);

/// Scheduler oracle over a sequence of suites. Suite s is live from step
/// switch_at[s - 1]. Each task loss is linear, <mu_i, theta>, so gradients
/// are mu_i plus noise and the loss is only a logged diagnostic.
class PlantedOracle : public GradientOracle {
 public:
  explicit PlantedOracle(PlantedTaskSuite suite);
  PlantedOracle(std::vector<PlantedTaskSuite> phases, std::vector<std::size_t> switch_at);

  std::size_t tasks() const override { return phases_.front().tasks; }
  std::size_t dim() const override { return phases_.front().dim; }
  void begin_step(std::size_t step) override;
  void gradient(std::size_t task, std::span<const double> theta, std::span<const double> head,
                Rng& rng, std::span<double> g, std::span<double> h) override;
  double loss(std::span<const double> theta, const std::vector<Vector>& heads) const override;

  const PlantedTaskSuite& current() const { return phases_[phase_]; }
  /// Suite live at a given step.
  const PlantedTaskSuite& at(std::size_t step) const;

 private:
  std::vector<PlantedTaskSuite> phases_;
  std::vector<std::size_t> switch_at_;
  std::size_t phase_ = 0;
};

}  // namespace songoku
