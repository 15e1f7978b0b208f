#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "songoku/matrix.hpp"

namespace songoku {

/// Thrown when a gradient's length does not match the run's dimension.
class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t got, std::size_t expected)
      : std::invalid_argument("gradient has dimension " + std::to_string(got) +
                              ", expected " + std::to_string(expected)),
        got_(got),
        expected_(expected) {}
  std::size_t got() const { return got_; }
  std::size_t expected() const { return expected_; }

 private:
  std::size_t got_;
  std::size_t expected_;
};

/// Fewer than two tasks survive the norm floor, so no pairwise cosine exists.
class DegenerateMatrix : public std::runtime_error {
 public:
  explicit DegenerateMatrix(std::size_t included)
      : std::runtime_error("degenerate interference matrix: " + std::to_string(included) +
                           " included task(s), need at least 2"),
        included_(included) {}
  std::size_t included() const { return included_; }

 private:
  std::size_t included_;
};

/// Per-task EMA gradient buffers.
///
/// Row i holds the smoothed gradient of task i. A task whose EMA norm falls
/// below the norm floor is flagged excluded and treated as an isolated vertex
/// downstream. Buffers are never reset by a refresh.
class GradStats {
 public:
  static constexpr double kDefaultNormFloor = 1e-8;

  GradStats(std::size_t tasks, std::size_t dim, double beta,
            double norm_floor = kDefaultNormFloor);

  std::size_t tasks() const { return ema_.rows(); }
  std::size_t dim() const { return ema_.cols(); }
  double beta() const { return beta_; }
  double norm_floor() const { return norm_floor_; }

  /// row <- beta * row + (1 - beta) * grad. Throws DimensionMismatch.
  void update(std::size_t task, std::span<const double> grad);

  /// Update every listed task from the matching row of `grads` (K x d). Rows
  /// are independent, so this runs them in parallel.
  void update_rows(const Matrix& grads, std::span<const std::size_t> tasks);

  /// Overwrite a row directly (used by the single-sample ablation).
  void assign(std::size_t task, std::span<const double> values);

  const Matrix& ema() const { return ema_; }
  std::span<const double> row(std::size_t task) const { return ema_.row(task); }
  double row_norm(std::size_t task) const { return norms_[task]; }
  bool excluded(std::size_t task) const { return excluded_[task] != 0; }
  std::size_t included_count() const;
  std::vector<bool> included_mask() const;

  /// Number of EMA updates applied to a task since construction.
  std::uint64_t steps_since_reset(std::size_t task) const { return updates_[task]; }
  /// Monotone per-row version, bumped by every write.
  std::uint64_t version(std::size_t task) const { return versions_[task]; }
  std::span<const std::uint64_t> versions() const { return versions_; }

 private:
  void refresh_row_meta(std::size_t task);
  void check_task(std::size_t task) const;

  Matrix ema_;
  double beta_;
  double norm_floor_;
  std::vector<double> norms_;
  std::vector<char> excluded_;
  std::vector<std::uint64_t> updates_;
  std::vector<std::uint64_t> versions_;
};

/// rho = -cos between included EMA rows. Excluded rows and columns are zero.
struct InterferenceMatrix {
  Matrix rho;
  std::vector<bool> included;

  std::size_t size() const { return rho.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return rho(i, j); }
};

/// Interference from the current EMA snapshot. Throws DegenerateMatrix.
InterferenceMatrix interference_matrix(const GradStats& stats);

/// Interference from an arbitrary row matrix and inclusion mask (used by the
/// sketched paths, which work on transformed rows).
InterferenceMatrix interference_from_gram(const Matrix& gram, const std::vector<bool>& included);

/// Closed-form effective sample size of a normalised length-R EMA window:
/// 1 / sum_t w_t^2 with w_t proportional to beta^(R - t).
double effective_sample_size(double beta, std::size_t window);

}  // namespace songoku
