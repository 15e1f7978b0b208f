#include <doctest.h>

#include <cmath>

#include "songoku/grad_stats.hpp"

using namespace songoku;

namespace {

GradStats two_rows(const Vector& a, const Vector& b) {
  GradStats s(2, a.size(), 0.0);
  s.update(0, a);
  s.update(1, b);
  return s;
}

}  // namespace

TEST_CASE("ema update examples") {
  GradStats s(1, 2, 0.0);
  s.update(0, Vector{5, 5});
  s.update(0, Vector{1, 2});
  CHECK(s.row(0)[0] == 1.0);
  CHECK(s.row(0)[1] == 2.0);

  GradStats h(1, 2, 0.5);
  h.update(0, Vector{2, 4});
  CHECK(h.row(0)[0] == 1.0);
  CHECK(h.row(0)[1] == 2.0);

  GradStats f(1, 2, 0.9);
  f.assign(0, Vector{1, 0});
  f.update(0, Vector{1, 0});
  CHECK(f.row(0)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.row(0)[1] == 0.0);
}

TEST_CASE("dimension mismatch is reported") {
  GradStats s(2, 3, 0.5);
  try {
    s.update(0, Vector{1, 2});
    FAIL("expected DimensionMismatch");
  } catch (const DimensionMismatch& e) {
    CHECK(e.got() == 2);
    CHECK(e.expected() == 3);
  }
}

TEST_CASE("norm floor excludes small rows") {
  GradStats s(3, 2, 0.0);
  s.update(0, Vector{1, 0});
  s.update(1, Vector{1e-10, 0});
  CHECK_FALSE(s.excluded(0));
  CHECK(s.excluded(1));
  CHECK(s.excluded(2));
  CHECK(s.included_count() == 1);
  CHECK_THROWS_AS(interference_matrix(s), DegenerateMatrix);
}

TEST_CASE("effective sample size") {
  CHECK(effective_sample_size(0.0, 10) == doctest::Approx(1.0));
  CHECK(effective_sample_size(0.5, 2) == doctest::Approx(1.8));
  CHECK(effective_sample_size(0.5, 500) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK_THROWS(effective_sample_size(1.0, 4));
  for (double beta : {0.0, 0.3, 0.9, 0.99}) {
    double prev = 0.0;
    for (std::size_t r = 1; r <= 400; ++r) {
      const double n = effective_sample_size(beta, r);
      CHECK(n >= prev - 1e-12);
      prev = n;
    }
    const double limit = (1 + beta) / (1 - beta);
    CHECK(std::abs(effective_sample_size(beta, 5000) - limit) < 1e-9);
  }
}

TEST_CASE("interference examples") {
  CHECK(interference_matrix(two_rows({1, 0}, {0, 1}))(0, 1) == doctest::Approx(0.0));
  CHECK(interference_matrix(two_rows({1, 0}, {-1, 0}))(0, 1) == doctest::Approx(1.0));
  CHECK(interference_matrix(two_rows({1, 0}, {-0.5, 0.8660254}))(0, 1) ==
        doctest::Approx(0.5).epsilon(1e-7));
  const auto rho = interference_matrix(two_rows({2, 1}, {-1, 3}));
  CHECK(rho(0, 1) == rho(1, 0));
  CHECK(rho(0, 1) >= -1.0);
  CHECK(rho(0, 1) <= 1.0);
}
