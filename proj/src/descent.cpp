#include "songoku/descent.hpp"

#include <algorithm>

#include "songoku/kernels.hpp"

namespace songoku {

namespace {

double conflict_mass(const std::vector<Vector>& grads) {
  double mass = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i)
    for (std::size_t j = i + 1; j < grads.size(); ++j)
      mass += 2.0 * std::max(0.0, -kernels::dot(grads[i], grads[j]));
  return mass;
}

double total_sq(const std::vector<Vector>& grads) {
  double s = 0.0;
  for (const auto& g : grads) s += kernels::squared_norm(g);
  return s;
}

}  // namespace

double aggregate_conflict_ratio(const std::vector<Vector>& grads) {
  const double s = total_sq(grads);
  return s > 0.0 ? conflict_mass(grads) / s : 0.0;
}

bool tau_compatible(const std::vector<Vector>& grads, double tau) {
  for (std::size_t i = 0; i < grads.size(); ++i)
    for (std::size_t j = i + 1; j < grads.size(); ++j)
      if (kernels::dot(grads[i], grads[j]) <
          -tau * kernels::norm(grads[i]) * kernels::norm(grads[j]))
        return false;
  return true;
}

DescentCheck descent_check(const std::vector<Vector>& grads, double tau, double rel_tol) {
  DescentCheck c;
  if (grads.empty()) return c;
  Vector sum(grads.front().size(), 0.0);
  for (const auto& g : grads)
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += g[i];
  c.lhs = kernels::squared_norm(sum);
  c.sum_sq = total_sq(grads);
  c.tau_eff = c.sum_sq > 0.0 ? conflict_mass(grads) / c.sum_sq : 0.0;
  c.rhs_data = (1.0 - c.tau_eff) * c.sum_sq;
  c.rhs_worst = (1.0 - tau * static_cast<double>(grads.size() - 1)) * c.sum_sq;
  c.compatible = tau_compatible(grads, tau);
  const double slack = rel_tol * c.sum_sq;
  c.ok = c.lhs >= c.rhs_data - slack && (!c.compatible || c.lhs >= c.rhs_worst - slack);
  return c;
}

}  // namespace songoku
