#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "songoku/convergence.hpp"
#include "songoku/descent.hpp"
#include "songoku/planted.hpp"
#include "songoku/quadratic.hpp"
#include "songoku/recovery.hpp"
#include "songoku/scheduler.hpp"

using namespace songoku;

namespace {

double cosine(std::span<const double> a, std::span<const double> b) {
  return kernels::dot(a, b) / (kernels::norm(a) * kernels::norm(b));
}

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t i = 0;
  for (auto r : rows) m.set_row(i++, Vector(r));
  return m;
}

// F_k = 1/2 sum_i w_ki (x_i - c_i)^2, a shared optimum c and noiseless gradients
class DiagQuadratic : public GradientOracle {
 public:
  DiagQuadratic(std::vector<Vector> w, Vector c) : w_(std::move(w)), c_(std::move(c)) {}
  std::size_t tasks() const override { return w_.size(); }
  std::size_t dim() const override { return c_.size(); }
  void gradient(std::size_t k, std::span<const double> x, std::span<const double>, Rng&,
                std::span<double> g, std::span<double>) override {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = w_[k][i] * (x[i] - c_[i]);
  }
  double loss(std::span<const double> x, const std::vector<Vector>&) const override {
    double f = 0;
    for (const auto& w : w_)
      for (std::size_t i = 0; i < x.size(); ++i) f += 0.5 * w[i] * (x[i] - c_[i]) * (x[i] - c_[i]);
    return f;
  }
  double full_gradient_norm_sq(std::span<const double> x,
                               const std::vector<Vector>&) const override {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double g = 0;
      for (const auto& w : w_) g += w[i] * (x[i] - c_[i]);
      s += g * g;
    }
    return s;
  }
  Vector initial_theta() const override { return Vector(dim(), 5.0); }

 private:
  std::vector<Vector> w_;
  Vector c_;
};

}  // namespace

TEST_CASE("planted suite margins") {
  SUBCASE("antipodal two groups") {
    PlantedSpec s;
    s.tasks = 4;
    s.dim = 8;
    s.tau = 0.5;
    s.gamma = 0.4;
    const auto suite = make_planted_suite(s);
    const auto a = audit_margins(suite);
    CHECK(a.ok);
    CHECK(a.max_cross_cos <= -0.9 + 1e-12);
    CHECK(a.min_within_cos >= -0.1 - 1e-12);
  }
  SUBCASE("K=8 enumerated") {
    const auto suite = make_planted_suite(PlantedSpec{});
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = i + 1; j < 8; ++j, ++pairs) {
        const double c = cosine(suite.mu.row(i), suite.mu.row(j));
        if (suite.group_of[i] == suite.group_of[j])
          CHECK(c >= -(0.5 - 0.3) - 1e-12);
        else
          CHECK(c <= -(0.5 + 0.3) + 1e-12);
      }
    CHECK(pairs == 28);
    for (std::size_t i = 0; i < 8; ++i) CHECK(kernels::norm(suite.mu.row(i)) == doctest::Approx(1.0));
  }
  SUBCASE("three groups") {
    PlantedSpec s;
    s.tasks = 9;
    s.groups = 3;
    s.tau = 0.2;
    s.gamma = 0.1;
    CHECK(audit_margins(make_planted_suite(s)).ok);
  }
  SUBCASE("infeasible margins") {
    PlantedSpec s;
    s.gamma = 0.5;
    CHECK_THROWS_AS(make_planted_suite(s), InfeasibleSuite);
    s.gamma = 0.3;
    s.dim = 4;
    CHECK_THROWS_AS(make_planted_suite(s), InfeasibleSuite);
  }
}

TEST_CASE("sampling") {
  PlantedSpec s;
  s.sigma = 0.0;
  const auto quiet = make_planted_suite(s);
  Rng rng(1);
  const Vector g = sample_gradient(quiet, 3, rng);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == quiet.mu(3, i));

  PlantedSpec big;
  big.tasks = 2;
  big.dim = 1000;
  big.sigma = 1.0;
  const auto noisy = make_planted_suite(big);
  Rng r2(9);
  Vector mean(1000, 0.0);
  for (int n = 0; n < 10000; ++n) {
    const Vector x = sample_gradient(noisy, 0, r2);
    for (std::size_t i = 0; i < 1000; ++i) mean[i] += x[i] / 10000.0;
  }
  std::size_t outside = 0;
  for (std::size_t i = 0; i < 1000; ++i)
    if (std::abs(mean[i] - noisy.mu(0, i)) > 3.0 / 100.0) ++outside;
  CHECK(outside <= 10);  // ~0.27% expected outside 3 sigma

  Rng a(5), b(5);
  CHECK(sample_gradient(noisy, 1, a) == sample_gradient(noisy, 1, b));
}

TEST_CASE("suite round trip") {
  const auto suite = make_planted_suite(PlantedSpec{});
  std::stringstream ss;
  write_suite(ss, suite);
  const auto back = read_suite(ss);
  CHECK(back.group_of == suite.group_of);
  CHECK(back.mu == suite.mu);
  CHECK(back.population_graph() == suite.population_graph());
}

TEST_CASE("recovery") {
  PlantedSpec s;
  s.sigma = 0.0;
  const auto quiet = make_planted_suite(s);
  for (double n : {1.0, 5.0, 50.0}) {
    const auto res = recovery_experiment(quiet, ema_plan_for(n), 0.5, 50, 3);
    CHECK(res.rate() == 1.0);
  }
  const auto plan = ema_plan_for(20.0);
  CHECK(plan.window == 40);
  CHECK(effective_sample_size(plan.beta, plan.window) == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(ema_plan_for(0.5).window == 1);
  CHECK(required_neff(1.0, 1.0, 1.0, 0.5, 8, 0.1) ==
        doctest::Approx(4.0 * std::log(640.0)));
  ExperimentResult r{100, 90, {}};
  CHECK(r.lower() < 0.9);
  CHECK(r.upper() > 0.9);
  const auto a = recovery_experiment(make_planted_suite(PlantedSpec{}), ema_plan_for(30), 0.5, 40, 8);
  const auto b = recovery_experiment(make_planted_suite(PlantedSpec{}), ema_plan_for(30), 0.5, 40, 8);
  CHECK(a.successes == b.successes);
  CHECK(a.diagnostics == b.diagnostics);
}

TEST_CASE("aggregated and scheduled steps") {
  QuadraticTask t1{mat({{2, 0}, {0, 1}}), {1, -1}};
  QuadraticTask t2{mat({{1, 0}, {0, 3}}), {-2, 0.5}};
  const QuadraticMTL q({t1, t2});
  const Vector x{0.3, 0.2};
  const double eta = 1.0 / q.smoothness();
  SUBCASE("single group is a gradient step and both rules agree") {
    const Groups one{{0, 1}};
    const Vector a = aggregated_step(q, x, one, eta);
    const Vector s = scheduled_refresh(q, x, one, eta);
    const Vector g = q.gradient(x);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(a[i] == doctest::Approx(x[i] - eta * g[i]));
      CHECK(s[i] == a[i]);
    }
  }
  SUBCASE("hand computed affine update") {
    // G1 = H1 (x - c1) = (2*(-0.7), 1*1.2) ; G2 = H2 (x - c2) = (2.3, 3*(-0.3))
    const Vector a = aggregated_step(q, x, {{0}, {1}}, eta);
    CHECK(a[0] == doctest::Approx(0.3 - eta * (-1.4 + 2.3)));
    CHECK(a[1] == doctest::Approx(0.2 - eta * (1.2 - 0.9)));
  }
  SUBCASE("cancelling groups leave x unchanged") {
    QuadraticTask u{mat({{1, 0}, {0, 1}}), {1, 1}};
    QuadraticTask v{mat({{1, 0}, {0, 1}}), {-1, -1}};
    const QuadraticMTL c({u, v});
    const Vector z{0, 0};
    CHECK(aggregated_step(c, z, {{0}, {1}}, 0.25) == z);
  }
  SUBCASE("step size outside (0, 1/L] is rejected") {
    CHECK_THROWS_AS(aggregated_step(q, x, {{0}, {1}}, 1.01 * eta), StepSizeError);
    CHECK_THROWS_AS(scheduled_refresh(q, x, {{0}, {1}}, 0.0), StepSizeError);
  }
}

TEST_CASE("reference instance strictly improves") {
  const auto q = reference_instance();
  const double eta = 1.0 / q.smoothness();
  const auto rep = improvement_report(q, Vector{0, 0}, {{0}, {1}}, eta);
  CHECK(rep.condition_holds);
  CHECK(rep.hessian_negative);
  CHECK(rep.f_aggregated - rep.f_scheduled >= 1e-6);
  CHECK(rep.f_aggregated - rep.f_scheduled == doctest::Approx(3.2777e-3).epsilon(1e-3));
}

TEST_CASE("block diagonal instances agree") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto q = block_diagonal_instance(3, 2, s);
    const Vector x(q.dim(), 1.0);
    const double eta = 1.0 / q.smoothness();
    const Vector a = aggregated_step(q, x, {{0}, {1}, {2}}, eta);
    const Vector b = scheduled_refresh(q, x, {{0}, {1}, {2}}, eta);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
  }
}

TEST_CASE("descent check") {
  SUBCASE("random tau-compatible triples") {
    Rng rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    int accepted = 0;
    while (accepted < 2000) {
      std::vector<Vector> g(3, Vector(4));
      for (auto& v : g)
        for (double& x : v) x = n(rng);
      if (!tau_compatible(g, 0.3)) continue;
      ++accepted;
      const auto dc = descent_check(g, 0.3);
      CHECK(dc.compatible);
      CHECK(dc.ok);
      CHECK(dc.lhs >= 0.4 * dc.sum_sq - 1e-9 * dc.sum_sq);
      CHECK(dc.tau_eff <= 0.6 + 1e-12);
    }
  }
  SUBCASE("antipodal pair") {
    const std::vector<Vector> g{{1, 0}, {-1, 0}};
    const auto dc = descent_check(g, 0.5);
    CHECK_FALSE(dc.compatible);
    CHECK(dc.tau_eff == doctest::Approx(1.0));
    CHECK(dc.ok);
    CHECK(aggregate_conflict_ratio({{1, 0}, {0, 1}}) == 0.0);
  }
}

TEST_CASE("noiseless strongly convex run decays per window") {
  DiagQuadratic oracle({{1, 0.2}, {0.3, 2}, {1.5, 1}}, {1, -2});
  SchedulerConfig c;
  c.refresh_period = 4;
  c.total_steps = 80;
  c.step_size = 0.1;
  const auto rec = run(c, oracle);
  double prev = 1e300;
  for (const auto& s : rec.steps) {
    if (s.t % c.refresh_period != 0) continue;
    CHECK(s.full_grad_sq <= prev);
    prev = s.full_grad_sq;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("logistic testbed") {
  LogisticOracle o(LogisticSpec{});
  CHECK(o.tasks() == 4);
  CHECK(o.smoothness() > 0.0);
  const Vector theta(8, 0.0);
  CHECK(o.loss(theta, {}) == doctest::Approx(4.0 * std::log(2.0)));
  Vector g(8);
  Vector total(8, 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    o.task_gradient(k, theta, g);
    for (std::size_t i = 0; i < 8; ++i) total[i] += g[i];
  }
  CHECK(o.full_gradient_norm_sq(theta, {}) == doctest::Approx(kernels::squared_norm(total)));
  CHECK(loglog_slope({10, 100, 1000}, {1, 0.1, 0.01}) == doctest::Approx(-1.0));
}

TEST_CASE("convergence experiment is deterministic") {
  ConvergenceSpec s;
  s.horizons = {50, 200};
  s.seeds = 3;
  s.scheduler.selection = ClassSelection::kRandomScaled;
  s.scheduler.refresh_period = 8;
  const auto a = convergence_experiment(s);
  const auto b = convergence_experiment(s);
  CHECK(a.mean_min_grad_sq == b.mean_min_grad_sq);
  CHECK(a.runs == 6);
  CHECK(a.mean_min_grad_sq[1] < a.mean_min_grad_sq[0]);
}
