#pragma once

// Data-parallel kernels behind the refresh and the per-step update.
//
// Every kernel has a serial reference and an OpenMP version. Both reduce each
// output entry with the same left-to-right loop, so their results are
// bit-identical regardless of thread count. The OpenMP versions only split
// work across independent output entries.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "songoku/matrix.hpp"

namespace songoku {

/// Multiply-add counter used for the cost-accounting checks.
struct FlopCounter {
  std::uint64_t multiply_adds = 0;
  std::uint64_t dot_products = 0;

  void add_dots(std::uint64_t count, std::uint64_t length) {
    dot_products += count;
    multiply_adds += count * length;
  }
  void add(std::uint64_t madds) { multiply_adds += madds; }

  FlopCounter& operator+=(const FlopCounter& o) {
    multiply_adds += o.multiply_adds;
    dot_products += o.dot_products;
    return *this;
  }
  friend bool operator==(const FlopCounter&, const FlopCounter&) = default;
};

namespace kernels {

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double norm(std::span<const double> a);

/// G = M M^T (K x K). Only the upper triangle is reduced; the lower is mirrored.
void gram_serial(const Matrix& m, Matrix& gram);
void gram_omp(const Matrix& m, Matrix& gram);

/// Recompute rows and columns `rows` of an existing Gram matrix.
void gram_rows_serial(const Matrix& m, std::span<const std::size_t> rows, Matrix& gram);
void gram_rows_omp(const Matrix& m, std::span<const std::size_t> rows, Matrix& gram);

/// out = M P, with M K x d and P d x r.
void project_serial(const Matrix& m, const Matrix& p, Matrix& out);
void project_omp(const Matrix& m, const Matrix& p, Matrix& out);

/// out = sum of the listed rows of M, accumulated in list order per column.
void sum_rows_serial(const Matrix& m, std::span<const std::size_t> rows, std::span<double> out);
void sum_rows_omp(const Matrix& m, std::span<const std::size_t> rows, std::span<double> out);

/// Row-wise EMA: ema[i] = beta * ema[i] + (1 - beta) * grads[i] for each listed row.
void ema_rows_serial(Matrix& ema, const Matrix& grads, std::span<const std::size_t> rows,
                     double beta);
void ema_rows_omp(Matrix& ema, const Matrix& grads, std::span<const std::size_t> rows,
                  double beta);

// Defaults used by the library. They dispatch to the OpenMP versions.
inline void gram(const Matrix& m, Matrix& g) { gram_omp(m, g); }
inline void gram_rows(const Matrix& m, std::span<const std::size_t> rows, Matrix& g) {
  gram_rows_omp(m, rows, g);
}
inline void project(const Matrix& m, const Matrix& p, Matrix& out) { project_omp(m, p, out); }
inline void sum_rows(const Matrix& m, std::span<const std::size_t> rows, std::span<double> out) {
  sum_rows_omp(m, rows, out);
}
inline void ema_rows(Matrix& ema, const Matrix& grads, std::span<const std::size_t> rows,
                     double beta) {
  ema_rows_omp(ema, grads, rows, beta);
}

}  // namespace kernels
}  // namespace songoku
