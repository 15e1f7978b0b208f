#pragma once

#include <vector>

#include "songoku/matrix.hpp"

namespace songoku {

struct DescentCheck {
  double lhs = 0.0;             // ||sum g||^2
  double sum_sq = 0.0;          // sum ||g||^2
  double rhs_worst = 0.0;       // (1 - tau (|S| - 1)) sum ||g||^2
  double rhs_data = 0.0;        // (1 - tau_eff) sum ||g||^2
  double tau_eff = 0.0;
  bool compatible = false;      // every pair has <g_i, g_j> >= -tau ||g_i|| ||g_j||
  bool ok = true;
};

/// Sum over ordered pairs i != j of max(0, -<g_i, g_j>), divided by sum ||g||^2.
double aggregate_conflict_ratio(const std::vector<Vector>& grads);

bool tau_compatible(const std::vector<Vector>& grads, double tau);

/// Both descent lower bounds for the set. The worst-case bound is only
/// enforced when the set is tau-compatible. `rel_tol` scales with sum ||g||^2.
DescentCheck descent_check(const std::vector<Vector>& grads, double tau, double rel_tol = 1e-9);

}  // namespace songoku
