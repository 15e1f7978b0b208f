#include "songoku/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <stdexcept>

namespace songoku::kernels {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

namespace {

void check_gram_shape(const Matrix& m, Matrix& gram) {
  if (gram.rows() != m.rows() || gram.cols() != m.rows()) gram = Matrix(m.rows(), m.rows());
}

void check_project_shape(const Matrix& m, const Matrix& p, Matrix& out) {
  if (m.cols() != p.rows()) {
    throw std::invalid_argument("projection: input has " + std::to_string(m.cols()) +
                                " columns but projection has " + std::to_string(p.rows()) +
                                " rows");
  }
  if (out.rows() != m.rows() || out.cols() != p.cols()) out = Matrix(m.rows(), p.cols());
}

// One output row of M P. Entry (i, c) accumulates over k in increasing order.
inline void project_row(const Matrix& m, const Matrix& p, std::size_t i, Matrix& out) {
  const auto mi = m.row(i);
  auto oi = out.row(i);
  std::fill(oi.begin(), oi.end(), 0.0);
  for (std::size_t k = 0; k < mi.size(); ++k) {
    const double a = mi[k];
    const auto pk = p.row(k);
    for (std::size_t c = 0; c < oi.size(); ++c) oi[c] += a * pk[c];
  }
}

}  // namespace

void gram_serial(const Matrix& m, Matrix& gram) {
  check_gram_shape(m, gram);
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) gram(i, j) = dot(m.row(i), m.row(j));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) gram(i, j) = gram(j, i);
}

void gram_omp(const Matrix& m, Matrix& gram) {
  check_gram_shape(m, gram);
  const auto n = static_cast<std::ptrdiff_t>(m.rows());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = i; j < n; ++j)
      gram(i, j) = dot(m.row(static_cast<std::size_t>(i)), m.row(static_cast<std::size_t>(j)));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = 0; j < i; ++j) gram(i, j) = gram(j, i);
}

void gram_rows_serial(const Matrix& m, std::span<const std::size_t> rows, Matrix& gram) {
  const std::size_t n = m.rows();
  for (std::size_t r : rows) {
    for (std::size_t j = 0; j < n; ++j) {
      // Keep the (min, max) operand order of the full build so entries match bitwise.
      const std::size_t a = std::min(r, j), b = std::max(r, j);
      const double v = dot(m.row(a), m.row(b));
      gram(r, j) = v;
      gram(j, r) = v;
    }
  }
}

void gram_rows_omp(const Matrix& m, std::span<const std::size_t> rows, Matrix& gram) {
  const std::size_t n = m.rows();
  const auto s = static_cast<std::ptrdiff_t>(rows.size());
  Matrix fresh(rows.size(), n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < s; ++q) {
    const std::size_t r = rows[static_cast<std::size_t>(q)];
    for (std::size_t j = 0; j < n; ++j)
      fresh(static_cast<std::size_t>(q), j) = dot(m.row(std::min(r, j)), m.row(std::max(r, j)));
  }
  for (std::size_t q = 0; q < rows.size(); ++q) {
    for (std::size_t j = 0; j < n; ++j) {
      gram(rows[q], j) = fresh(q, j);
      gram(j, rows[q]) = fresh(q, j);
    }
  }
}

void project_serial(const Matrix& m, const Matrix& p, Matrix& out) {
  check_project_shape(m, p, out);
  for (std::size_t i = 0; i < m.rows(); ++i) project_row(m, p, i, out);
}

void project_omp(const Matrix& m, const Matrix& p, Matrix& out) {
  check_project_shape(m, p, out);
  const auto n = static_cast<std::ptrdiff_t>(m.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) project_row(m, p, static_cast<std::size_t>(i), out);
}

void sum_rows_serial(const Matrix& m, std::span<const std::size_t> rows, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r : rows) {
    const auto mr = m.row(r);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += mr[c];
  }
}

void sum_rows_omp(const Matrix& m, std::span<const std::size_t> rows, std::span<double> out) {
  const auto d = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::size_t r : rows) s += m(r, static_cast<std::size_t>(c));
    out[static_cast<std::size_t>(c)] = s;
  }
}

void ema_rows_serial(Matrix& ema, const Matrix& grads, std::span<const std::size_t> rows,
                     double beta) {
  for (std::size_t r : rows) {
    auto e = ema.row(r);
    const auto g = grads.row(r);
    for (std::size_t c = 0; c < e.size(); ++c) e[c] = beta * e[c] + (1.0 - beta) * g[c];
  }
}

void ema_rows_omp(Matrix& ema, const Matrix& grads, std::span<const std::size_t> rows,
                  double beta) {
  const auto s = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < s; ++q) {
    const std::size_t r = rows[static_cast<std::size_t>(q)];
    auto e = ema.row(r);
    const auto g = grads.row(r);
    for (std::size_t c = 0; c < e.size(); ++c) e[c] = beta * e[c] + (1.0 - beta) * g[c];
  }
}

}  // namespace songoku::kernels
