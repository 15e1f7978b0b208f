#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "songoku/planted.hpp"
#include "songoku/sketch.hpp"

using namespace songoku;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  return kernels::dot(a, b) / (kernels::norm(a) * kernels::norm(b));
}

}  // namespace

TEST_CASE("jl identity keeps cosines exactly") {
  const Matrix m = random_matrix(5, 12, 1);
  const Matrix p = jl_project(m, 12, 0, true);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(cosine(p.row(i), p.row(j)) == cosine(m.row(i), m.row(j)));
}

TEST_CASE("jl edge cases") {
  const Matrix z(4, 10);
  const Matrix p = jl_project(z, 6, 3);
  for (double v : p.data()) CHECK(v == 0.0);
  CHECK_THROWS(jl_project(z, 11, 3));
  CHECK(jl_dimension(0.15, 8) == static_cast<std::size_t>(std::ceil(std::log(8.0) / (0.15 * 0.15))));
}

TEST_CASE("frequent directions") {
  SUBCASE("empty stream is zero") {
    FrequentDirections fd(4, 6);
    for (double v : fd.sketch().data()) CHECK(v == 0.0);
    CHECK(fd.shrinkage() == 0.0);
  }
  SUBCASE("rank one stream is exact") {
    FrequentDirections fd(2, 3);
    const Vector r{1, 2, 2};
    for (int i = 0; i < 9; ++i) fd = fd_update(std::move(fd), r);
    const auto b = to_eigen(fd.sketch());
    Eigen::MatrixXd a(9, 3);
    for (int i = 0; i < 9; ++i) a.row(i) << 1, 2, 2;
    CHECK((a.transpose() * a - b.transpose() * b).norm() < 1e-9);
  }
  SUBCASE("random stream respects the shrinkage bound") {
    const Matrix m = random_matrix(16, 64, 5);
    FrequentDirections fd(16, 64);
    for (std::size_t i = 0; i < 16; ++i) fd.insert(m.row(i));
    const auto a = to_eigen(m);
    const auto b = to_eigen(fd.sketch());
    const Eigen::MatrixXd diff = a.transpose() * a - b.transpose() * b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff);
    const double err = eig.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(err <= fd.shrinkage() + 1e-9);
    CHECK(fd.shrinkage() <= a.squaredNorm() / 8.0 + 1e-9);  // ||A||_F^2 / (ell - ell/2)
  }
}

TEST_CASE("edge sampling") {
  SUBCASE("K=3 matches the dense graph") {
    const double r[3][3] = {{0, 0.9, -0.2}, {0.9, 0, 0.7}, {-0.2, 0.7, 0}};
    auto rho = [&](std::size_t i, std::size_t j) { return r[i][j]; };
    const auto res = edge_sample_graph(rho, {true, true, true}, 0.5, 0.3, 0, 1);
    CHECK(res.graph.edges().size() == 2);
    CHECK(res.certified());
  }
  SUBCASE("zero conflict gives no refinement") {
    auto rho = [](std::size_t, std::size_t) { return -0.9; };
    const auto res = edge_sample_graph(rho, std::vector<bool>(10, true), 0.5, 0.3, 0, 2);
    CHECK(res.graph.edges().empty());
    CHECK(res.refined_pairs == 0);
  }
  SUBCASE("tiny budget reports uncertified pairs") {
    auto rho = [](std::size_t i, std::size_t j) { return ((i + j) % 3 == 0) ? 0.52 : 0.48; };
    const auto res = edge_sample_graph(rho, std::vector<bool>(12, true), 0.5, 0.3, 14, 3);
    CHECK_FALSE(res.certified());
    CHECK(res.evaluated_pairs() <= 14);
  }
}

TEST_CASE("incremental gram") {
  Matrix m = random_matrix(8, 20, 7);
  std::vector<std::uint64_t> v(8, 0);
  const GramCache cache = full_gram(m, v);
  SUBCASE("no change leaves the cache") {
    const auto out = incremental_gram(cache, m, v, {});
    CHECK(out.cache.gram == cache.gram);
    CHECK_FALSE(out.full_rebuild);
  }
  SUBCASE("one row") {
    for (double& x : m.row(3)) x *= -1.7;
    v[3] = 1;
    const std::vector<std::size_t> changed{3};
    const auto out = incremental_gram(cache, m, v, changed);
    const auto dense = full_gram(m, v);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j)
        CHECK(std::abs(out.cache.gram(i, j) - dense.gram(i, j)) <= 1e-12);
    CHECK(detect_changed_rows(cache, m, 0.05) == changed);
  }
  SUBCASE("stale version forces a rebuild") {
    m(2, 0) += 1.0;
    v[2] = 5;
    const auto out = incremental_gram(cache, m, v, {});
    CHECK(out.full_rebuild);
    CHECK(out.cache.gram == full_gram(m, v).gram);
  }
}

TEST_CASE("every route agrees with dense on a quiet planted suite") {
  PlantedSpec spec;
  spec.sigma = 0.0;
  const auto suite = make_planted_suite(spec);
  GradStats stats(suite.tasks, suite.dim, 0.0);
  for (std::size_t k = 0; k < suite.tasks; ++k) stats.update(k, suite.mu.row(k));
  SketchConfig dense_cfg;
  const auto dense = GraphBuilder(dense_cfg).build(stats, 0.5, 1).graph;
  CHECK(dense == suite.population_graph());
  for (auto mode : {SketchMode::kFd, SketchMode::kEdgeSample, SketchMode::kIncremental}) {
    SketchConfig c;
    c.mode = mode;
    c.fd_rows = 16;
    GraphBuilder b(c);
    CHECK(b.build(stats, 0.5, 1).graph == dense);
    CHECK(b.build(stats, 0.5, 2).graph == dense);
  }
  CHECK(parse_sketch_mode(to_string(SketchMode::kJl)) == SketchMode::kJl);
  CHECK_THROWS(parse_sketch_mode("bogus"));
}
