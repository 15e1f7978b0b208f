#include <doctest.h>

#include <numeric>
#include <random>

#include "songoku/kernels.hpp"
#include "songoku/rng.hpp"

using namespace songoku;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

}  // namespace

TEST_CASE("gram serial and omp agree bit for bit") {
  for (std::size_t k : {1u, 2u, 7u, 33u}) {
    const Matrix m = random_matrix(k, 129, k);
    Matrix a, b;
    kernels::gram_serial(m, a);
    kernels::gram_omp(m, b);
    CHECK(a == b);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) CHECK(a(i, j) == a(j, i));
  }
}

TEST_CASE("gram_rows serial and omp agree and match a full rebuild") {
  Matrix m = random_matrix(9, 40, 3);
  Matrix g;
  kernels::gram_serial(m, g);
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : m.row(4)) v = n(rng);
  for (double& v : m.row(7)) v = n(rng);
  const std::vector<std::size_t> rows{4, 7};
  Matrix a = g, b = g, full;
  kernels::gram_rows_serial(m, rows, a);
  kernels::gram_rows_omp(m, rows, b);
  kernels::gram_serial(m, full);
  CHECK(a == b);
  CHECK(a == full);
}

TEST_CASE("project, sum_rows and ema_rows serial/omp identity") {
  const Matrix m = random_matrix(11, 64, 8);
  const Matrix p = random_matrix(64, 5, 9);
  Matrix a, b;
  kernels::project_serial(m, p, a);
  kernels::project_omp(m, p, b);
  CHECK(a == b);
  CHECK(a.rows() == 11);
  CHECK(a.cols() == 5);

  const std::vector<std::size_t> rows{3, 0, 9};
  Vector s1(64), s2(64);
  kernels::sum_rows_serial(m, rows, s1);
  kernels::sum_rows_omp(m, rows, s2);
  CHECK(s1 == s2);
  CHECK(s1[0] == doctest::Approx(m(3, 0) + m(0, 0) + m(9, 0)));

  Matrix e1 = random_matrix(11, 64, 10), e2 = e1;
  kernels::ema_rows_serial(e1, m, rows, 0.7);
  kernels::ema_rows_omp(e2, m, rows, 0.7);
  CHECK(e1 == e2);
}

TEST_CASE("dot and norms") {
  const Vector a{3.0, 4.0};
  const Vector b{1.0, -2.0};
  CHECK(kernels::dot(a, b) == -5.0);
  CHECK(kernels::squared_norm(a) == 25.0);
  CHECK(kernels::norm(a) == 5.0);
}

TEST_CASE("flop counter accumulates") {
  FlopCounter f;
  f.add_dots(3, 10);
  f.add(4);
  FlopCounter g;
  g += f;
  CHECK(g.multiply_adds == 34);
  CHECK(g.dot_products == 3);
}
