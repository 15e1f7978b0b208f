#include "songoku/grad_stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "songoku/kernels.hpp"

namespace songoku {

GradStats::GradStats(std::size_t tasks, std::size_t dim, double beta, double norm_floor)
    : ema_(tasks, dim),
      beta_(beta),
      norm_floor_(norm_floor),
      norms_(tasks, 0.0),
      excluded_(tasks, 1),
      updates_(tasks, 0),
      versions_(tasks, 0) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in [0, 1), got " + std::to_string(beta));
  }
  if (!(norm_floor >= 0.0)) {
    throw std::invalid_argument("norm floor must be nonnegative");
  }
  for (std::size_t i = 0; i < tasks; ++i) refresh_row_meta(i);
}

void GradStats::check_task(std::size_t task) const {
  if (task >= tasks()) {
    throw std::out_of_range("task " + std::to_string(task) + " out of range [0, " +
                            std::to_string(tasks()) + ")");
  }
}

void GradStats::refresh_row_meta(std::size_t task) {
  norms_[task] = kernels::norm(ema_.row(task));
  excluded_[task] = norms_[task] < norm_floor_ ? 1 : 0;
}

void GradStats::update(std::size_t task, std::span<const double> grad) {
  check_task(task);
  if (grad.size() != dim()) throw DimensionMismatch(grad.size(), dim());
  auto row = ema_.row(task);
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = beta_ * row[c] + (1.0 - beta_) * grad[c];
  ++updates_[task];
  ++versions_[task];
  refresh_row_meta(task);
}

void GradStats::update_rows(const Matrix& grads, std::span<const std::size_t> tasks) {
  if (grads.cols() != dim()) throw DimensionMismatch(grads.cols(), dim());
  if (grads.rows() != this->tasks()) {
    throw std::invalid_argument("gradient block has " + std::to_string(grads.rows()) +
                                " rows, expected " + std::to_string(this->tasks()));
  }
  for (std::size_t t : tasks) check_task(t);
  kernels::ema_rows(ema_, grads, tasks, beta_);
  for (std::size_t t : tasks) {
    ++updates_[t];
    ++versions_[t];
    refresh_row_meta(t);
  }
}

void GradStats::assign(std::size_t task, std::span<const double> values) {
  check_task(task);
  if (values.size() != dim()) throw DimensionMismatch(values.size(), dim());
  ema_.set_row(task, values);
  ++updates_[task];
  ++versions_[task];
  refresh_row_meta(task);
}

std::size_t GradStats::included_count() const {
  std::size_t n = 0;
  for (char e : excluded_) n += e ? 0 : 1;
  return n;
}

std::vector<bool> GradStats::included_mask() const {
  std::vector<bool> mask(tasks());
  for (std::size_t i = 0; i < tasks(); ++i) mask[i] = excluded_[i] == 0;
  return mask;
}

InterferenceMatrix interference_from_gram(const Matrix& gram, const std::vector<bool>& included) {
  const std::size_t k = gram.rows();
  std::size_t count = 0;
  for (bool b : included) count += b ? 1 : 0;
  if (count < 2) throw DegenerateMatrix(count);

  InterferenceMatrix out{Matrix(k, k), included};
  std::vector<double> norms(k);
  for (std::size_t i = 0; i < k; ++i) norms[i] = std::sqrt(gram(i, i));
  for (std::size_t i = 0; i < k; ++i) {
    if (!included[i]) continue;
    out.rho(i, i) = -1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (!included[j]) continue;
      const double denom = norms[i] * norms[j];
      const double c = denom > 0.0 ? std::clamp(gram(i, j) / denom, -1.0, 1.0) : 0.0;
      out.rho(i, j) = -c;
      out.rho(j, i) = -c;
    }
  }
  return out;
}

InterferenceMatrix interference_matrix(const GradStats& stats) {
  auto included = stats.included_mask();
  std::size_t count = 0;
  for (bool b : included) count += b ? 1 : 0;
  if (count < 2) throw DegenerateMatrix(count);
  Matrix gram;
  kernels::gram(stats.ema(), gram);
  return interference_from_gram(gram, included);
}

double effective_sample_size(double beta, std::size_t window) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::invalid_argument("effective_sample_size: beta must lie in [0, 1), got " +
                                std::to_string(beta));
  }
  if (window == 0) throw std::invalid_argument("effective_sample_size: window must be >= 1");
  if (beta == 0.0) return 1.0;
  const double r = static_cast<double>(window);
  const double b_r = std::pow(beta, r);
  const double b_2r = b_r * b_r;
  const double inv = (1.0 - beta) * (1.0 - beta) * (1.0 - b_2r) /
                     ((1.0 - b_r) * (1.0 - b_r) * (1.0 - beta * beta));
  return 1.0 / inv;
}

}  // namespace songoku
