#pragma once

// Per-step gradient transforms that compose with the scheduler: pairwise
// projection inside the active group and per-task norm scaling.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "songoku/matrix.hpp"
#include "songoku/rng.hpp"

namespace songoku {

enum class CombinatorMode { kNone, kProject, kAdaptiveScale, kProjectAndScale };

std::string to_string(CombinatorMode mode);
CombinatorMode parse_combinator_mode(const std::string& name);

struct CombinatorConfig {
  CombinatorMode mode = CombinatorMode::kNone;
  double scale_ema_beta = 0.9;
  double scale_floor = 1e-3;
};

/// Pairwise projection. For each g_i, in a random order of the others, any
/// g_j with <g_i', g_j> < 0 has its direction removed from g_i'. Projections
/// use the original g_j, as in gradient surgery.
std::vector<Vector> project_within_group(const std::vector<Vector>& grads, Rng& rng);

/// Smallest pairwise inner product of a set (+inf for fewer than 2 vectors).
double min_pairwise_inner(const std::vector<Vector>& grads);

/// Per-task running norm used to rescale gradients.
class AdaptiveScaler {
 public:
  AdaptiveScaler(std::size_t tasks, double beta, double floor);

  /// grad / max(floor, ema) using the EMA before this gradient, then folds
  /// ||grad|| into the EMA. The first call for a task seeds the EMA with the
  /// current norm.
  Vector scale(std::size_t task, std::span<const double> grad);

  double running_norm(std::size_t task) const { return ema_[task]; }
  bool seeded(std::size_t task) const { return seeded_[task] != 0; }

 private:
  double beta_;
  double floor_;
  std::vector<double> ema_;
  std::vector<char> seeded_;
};

}  // namespace songoku
