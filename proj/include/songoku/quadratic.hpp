#pragma once

// Multi-task quadratic objectives F = sum_k 1/2 (x - x_k)^T H_k (x - x_k).
// Gradients are affine and the Hessian is constant, so the cross terms of the
// scheduled-versus-aggregated comparison are exact.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "songoku/matrix.hpp"

namespace songoku {

class StepSizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct QuadraticTask {
  Matrix hessian;  // d x d, symmetric PSD
  Vector optimum;
};

using Groups = std::vector<std::vector<std::size_t>>;

class QuadraticMTL {
 public:
  explicit QuadraticMTL(std::vector<QuadraticTask> tasks);

  std::size_t tasks() const { return tasks_.size(); }
  std::size_t dim() const { return dim_; }
  /// sum_k ||H_k||_2.
  double smoothness() const { return smoothness_; }
  /// ||sum_{k in group} H_k||_2, the Lipschitz constant of the group map.
  double group_lipschitz(const std::vector<std::size_t>& group) const;

  double task_loss(std::size_t k, const Vector& x) const;
  double loss(const Vector& x) const;
  Vector task_gradient(std::size_t k, const Vector& x) const;
  Vector group_gradient(const std::vector<std::size_t>& group, const Vector& x) const;
  Vector gradient(const Vector& x) const;
  /// sum_k H_k v.
  Vector hessian_times(const Vector& v) const;
  const QuadraticTask& task(std::size_t k) const { return tasks_[k]; }

 private:
  std::vector<QuadraticTask> tasks_;
  std::size_t dim_ = 0;
  double smoothness_ = 0.0;
};

/// x - eta sum_r G_r(x). Throws StepSizeError unless 0 < eta <= 1/L.
Vector aggregated_step(const QuadraticMTL& quad, const Vector& x, const Groups& groups, double eta);

/// x_r = x_{r-1} - eta G_r(x_{r-1}) in group order.
Vector scheduled_refresh(const QuadraticMTL& quad, const Vector& x, const Groups& groups,
                         double eta);

struct ImprovementReport {
  double f_aggregated = 0.0;
  double f_scheduled = 0.0;
  double cross_lhs = 0.0;     // sum_{p<q} (Gamma_pq ||G_p|| ||G_q|| + L <G_p, G_q>)
  double drift_bound = 0.0;   // R_m / eta^2 from the per-group Lipschitz bound
  bool condition_holds = false;
  bool hessian_negative = false;  // every I_pq <= 0
  std::vector<double> cross_terms;  // I_pq in (p, q) lexicographic order
};

/// Evaluates the cross terms I_pq = <H G_p, G_q>, their margins
/// Gamma_pq = -I_pq / (||G_p|| ||G_q||), the drift bound and both updates.
ImprovementReport improvement_report(const QuadraticMTL& quad, const Vector& x,
                                     const Groups& groups, double eta);

/// Two-task 2-D instance with negative Hessian-weighted coupling on which the
/// strict-improvement condition holds at x = 0 with eta = 1/L.
QuadraticMTL reference_instance();

/// Block-diagonal instance: task k acts only on coordinates [k*b, (k+1)*b).
QuadraticMTL block_diagonal_instance(std::size_t tasks, std::size_t block, std::uint64_t seed);

}  // namespace songoku
