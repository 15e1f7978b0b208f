#include "songoku/combinators.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "songoku/kernels.hpp"

namespace songoku {

std::string to_string(CombinatorMode mode) {
  switch (mode) {
    case CombinatorMode::kNone: return "none";
    case CombinatorMode::kProject: return "project";
    case CombinatorMode::kAdaptiveScale: return "adaptive_scale";
    case CombinatorMode::kProjectAndScale: return "project_and_scale";
  }
  return "none";
}

CombinatorMode parse_combinator_mode(const std::string& name) {
  if (name == "none") return CombinatorMode::kNone;
  if (name == "project") return CombinatorMode::kProject;
  if (name == "adaptive_scale") return CombinatorMode::kAdaptiveScale;
  if (name == "project_and_scale") return CombinatorMode::kProjectAndScale;
  throw std::invalid_argument("unknown combinator mode '" + name +
                              "' (expected none, project, adaptive_scale or project_and_scale)");
}

std::vector<Vector> project_within_group(const std::vector<Vector>& grads, Rng& rng) {
  std::vector<Vector> out = grads;
  const std::size_t n = grads.size();
  if (n < 2) return out;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    Vector& gi = out[i];
    for (std::size_t j : order) {
      if (j == i) continue;
      const Vector& gj = grads[j];
      const double inner = kernels::dot(gi, gj);
      if (inner >= 0.0) continue;
      const double nj = kernels::squared_norm(gj);
      if (nj == 0.0) continue;
      const double coef = inner / nj;
      for (std::size_t c = 0; c < gi.size(); ++c) gi[c] -= coef * gj[c];
    }
  }
  return out;
}

double min_pairwise_inner(const std::vector<Vector>& grads) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grads.size(); ++i)
    for (std::size_t j = i + 1; j < grads.size(); ++j)
      lo = std::min(lo, kernels::dot(grads[i], grads[j]));
  return lo;
}

AdaptiveScaler::AdaptiveScaler(std::size_t tasks, double beta, double floor)
    : beta_(beta), floor_(floor), ema_(tasks, 0.0), seeded_(tasks, 0) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("scale_ema_beta must lie in [0, 1)");
  if (!(floor > 0.0)) throw std::invalid_argument("scale_floor must be positive");
}

Vector AdaptiveScaler::scale(std::size_t task, std::span<const double> grad) {
  const double n = kernels::norm(grad);
  if (!seeded_[task]) {
    ema_[task] = n;
    seeded_[task] = 1;
  }
  const double denom = std::max(floor_, ema_[task]);
  Vector out(grad.begin(), grad.end());
  for (double& v : out) v /= denom;
  ema_[task] = beta_ * ema_[task] + (1.0 - beta_) * n;
  return out;
}

}  // namespace songoku
