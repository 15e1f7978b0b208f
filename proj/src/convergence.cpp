#include "songoku/convergence.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "songoku/kernels.hpp"
#include "songoku/rng.hpp"

namespace songoku {

namespace {

// log(1 + exp(-z)) without overflow.
double softplus_neg(double z) { return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

double sigmoid_neg(double z) {
  // 1 / (1 + exp(z))
  if (z >= 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace

LogisticOracle::LogisticOracle(const LogisticSpec& spec) : dim_(spec.dim) {
  if (spec.tasks < 1 || spec.dim < 1 || spec.points < 1)
    throw std::invalid_argument("logistic testbed needs K, d, n >= 1");
  Rng rng(derive_seed(spec.seed, 0x10915));
  std::normal_distribution<double> n01;
  Vector w(spec.dim);
  for (double& v : w) v = n01(rng);
  const double wn = kernels::norm(w);
  for (double& v : w) v /= wn;

  for (std::size_t k = 0; k < spec.tasks; ++k) {
    Vector off(spec.dim);
    for (double& v : off) v = spec.offset_scale * n01(rng);
    LogisticTask t;
    t.x = Matrix(spec.points, spec.dim);
    t.y.resize(spec.points);
    std::size_t filled = 0;
    Vector x(spec.dim);
    while (filled < spec.points) {
      for (std::size_t i = 0; i < spec.dim; ++i) x[i] = n01(rng) + off[i];
      const double s = kernels::dot(x, w);
      if (std::abs(s) < spec.margin) continue;
      t.x.set_row(filled, x);
      t.y[filled] = s > 0 ? 1.0 : -1.0;
      ++filled;
    }
    Eigen::MatrixXd xe(spec.points, spec.dim);
    for (std::size_t i = 0; i < spec.points; ++i)
      for (std::size_t j = 0; j < spec.dim; ++j) xe(i, j) = t.x(i, j);
    const Eigen::MatrixXd cov = xe.transpose() * xe / static_cast<double>(spec.points);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    smoothness_ += es.eigenvalues().maxCoeff() / 4.0;
    tasks_.push_back(std::move(t));
  }
}

void LogisticOracle::task_gradient(std::size_t task, std::span<const double> theta,
                                   std::span<double> g) const {
  const auto& t = tasks_[task];
  std::fill(g.begin(), g.end(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(t.x.rows());
  for (std::size_t i = 0; i < t.x.rows(); ++i) {
    const auto xi = t.x.row(i);
    const double p = sigmoid_neg(t.y[i] * kernels::dot(xi, theta));
    const double coef = -t.y[i] * p * inv_n;
    for (std::size_t j = 0; j < dim_; ++j) g[j] += coef * xi[j];
  }
}

void LogisticOracle::gradient(std::size_t task, std::span<const double> theta,
                              std::span<const double>, Rng&, std::span<double> g,
                              std::span<double>) {
  task_gradient(task, theta, g);
}

double LogisticOracle::loss(std::span<const double> theta, const std::vector<Vector>&) const {
  double f = 0.0;
  for (const auto& t : tasks_) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.x.rows(); ++i)
      s += softplus_neg(t.y[i] * kernels::dot(t.x.row(i), theta));
    f += s / static_cast<double>(t.x.rows());
  }
  return f;
}

double LogisticOracle::full_gradient_norm_sq(std::span<const double> theta,
                                             const std::vector<Vector>&) const {
  Vector total(dim_, 0.0);
  Vector g(dim_);
  for (std::size_t k = 0; k < tasks_.size(); ++k) {
    task_gradient(k, theta, g);
    for (std::size_t j = 0; j < dim_; ++j) total[j] += g[j];
  }
  return kernels::squared_norm(total);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("slope needs at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConvergenceResult convergence_experiment(const ConvergenceSpec& spec) {
  ConvergenceResult res;
  res.horizons = spec.horizons;
  const LogisticOracle probe_oracle(spec.problem);
  const double big_l = probe_oracle.smoothness();

  for (std::size_t horizon : spec.horizons) {
    std::vector<double> mins(spec.seeds, 0.0);
    const long n = static_cast<long>(spec.seeds);
#pragma omp parallel for schedule(dynamic)
    for (long s = 0; s < n; ++s) {
      LogisticOracle oracle(spec.problem);
      SchedulerConfig cfg = spec.scheduler;
      cfg.total_steps = horizon;
      cfg.step_rule = StepRule::kInverseSqrtT;
      cfg.step_size = spec.step_constant / big_l;
      cfg.seed = derive_seed(spec.scheduler.seed, horizon * 1000003ULL + static_cast<std::uint64_t>(s));
      const RunRecord rec = run(cfg, oracle);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& step : rec.steps) best = std::min(best, step.full_grad_sq);
      mins[static_cast<std::size_t>(s)] = best;
    }
    double mean = 0.0;
    for (double v : mins) mean += v;
    res.mean_min_grad_sq.push_back(mean / static_cast<double>(spec.seeds));
    res.runs += spec.seeds;
  }
  std::vector<double> xs(res.horizons.begin(), res.horizons.end());
  res.slope = loglog_slope(xs, res.mean_min_grad_sq);
  res.monotone = std::is_sorted(res.mean_min_grad_sq.rbegin(), res.mean_min_grad_sq.rend());
  return res;
}

}  // namespace songoku
