#include "songoku/quadratic.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "songoku/kernels.hpp"
#include "songoku/rng.hpp"

namespace songoku {

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

double spectral_norm_sym(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Vector mat_vec(const Matrix& h, const Vector& v) {
  Vector out(h.rows(), 0.0);
  for (std::size_t i = 0; i < h.rows(); ++i) out[i] = kernels::dot(h.row(i), v);
  return out;
}

void check_eta(const QuadraticMTL& quad, double eta) {
  const double limit = 1.0 / quad.smoothness();
  if (!(eta > 0.0) || eta > limit * (1.0 + 1e-12))
    throw StepSizeError("step size " + std::to_string(eta) + " outside (0, 1/L] with 1/L = " +
                        std::to_string(limit));
}

}  // namespace

QuadraticMTL::QuadraticMTL(std::vector<QuadraticTask> tasks) : tasks_(std::move(tasks)) {
  if (tasks_.empty()) throw std::invalid_argument("quadratic objective needs at least one task");
  dim_ = tasks_.front().optimum.size();
  for (const auto& t : tasks_) {
    if (t.hessian.rows() != dim_ || t.hessian.cols() != dim_ || t.optimum.size() != dim_)
      throw std::invalid_argument("quadratic task dimensions disagree");
    const Eigen::MatrixXd h = to_eigen(t.hessian);
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("Hessian must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) throw std::invalid_argument("Hessian must be PSD");
    smoothness_ += spectral_norm_sym(h);
  }
}

double QuadraticMTL::group_lipschitz(const std::vector<std::size_t>& group) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim_, dim_);
  for (std::size_t k : group) h += to_eigen(tasks_[k].hessian);
  return spectral_norm_sym(h);
}

double QuadraticMTL::task_loss(std::size_t k, const Vector& x) const {
  Vector r(dim_);
  for (std::size_t i = 0; i < dim_; ++i) r[i] = x[i] - tasks_[k].optimum[i];
  return 0.5 * kernels::dot(r, mat_vec(tasks_[k].hessian, r));
}

double QuadraticMTL::loss(const Vector& x) const {
  double f = 0.0;
  for (std::size_t k = 0; k < tasks_.size(); ++k) f += task_loss(k, x);
  return f;
}

Vector QuadraticMTL::task_gradient(std::size_t k, const Vector& x) const {
  Vector r(dim_);
  for (std::size_t i = 0; i < dim_; ++i) r[i] = x[i] - tasks_[k].optimum[i];
  return mat_vec(tasks_[k].hessian, r);
}

Vector QuadraticMTL::group_gradient(const std::vector<std::size_t>& group, const Vector& x) const {
  Vector g(dim_, 0.0);
  for (std::size_t k : group) {
    const Vector gk = task_gradient(k, x);
    for (std::size_t i = 0; i < dim_; ++i) g[i] += gk[i];
  }
  return g;
}

Vector QuadraticMTL::gradient(const Vector& x) const {
  Vector g(dim_, 0.0);
  for (std::size_t k = 0; k < tasks_.size(); ++k) {
    const Vector gk = task_gradient(k, x);
    for (std::size_t i = 0; i < dim_; ++i) g[i] += gk[i];
  }
  return g;
}

Vector QuadraticMTL::hessian_times(const Vector& v) const {
  Vector out(dim_, 0.0);
  for (const auto& t : tasks_) {
    const Vector hv = mat_vec(t.hessian, v);
    for (std::size_t i = 0; i < dim_; ++i) out[i] += hv[i];
  }
  return out;
}

Vector aggregated_step(const QuadraticMTL& quad, const Vector& x, const Groups& groups, double eta) {
  check_eta(quad, eta);
  Vector out = x;
  for (const auto& g : groups) {
    const Vector gr = quad.group_gradient(g, x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= eta * gr[i];
  }
  return out;
}

Vector scheduled_refresh(const QuadraticMTL& quad, const Vector& x, const Groups& groups,
                         double eta) {
  check_eta(quad, eta);
  Vector cur = x;
  for (const auto& g : groups) {
    const Vector gr = quad.group_gradient(g, cur);
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] -= eta * gr[i];
  }
  return cur;
}

ImprovementReport improvement_report(const QuadraticMTL& quad, const Vector& x,
                                     const Groups& groups, double eta) {
  ImprovementReport rep;
  rep.f_aggregated = quad.loss(aggregated_step(quad, x, groups, eta));
  rep.f_scheduled = quad.loss(scheduled_refresh(quad, x, groups, eta));

  const double big_l = quad.smoothness();
  const std::size_t m = groups.size();
  std::vector<Vector> g0(m);
  std::vector<double> norms(m);
  std::vector<double> lips(m);
  for (std::size_t r = 0; r < m; ++r) {
    g0[r] = quad.group_gradient(groups[r], x);
    norms[r] = kernels::norm(g0[r]);
    lips[r] = quad.group_lipschitz(groups[r]);
  }

  rep.hessian_negative = true;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = p + 1; q < m; ++q) {
      const double ipq = kernels::dot(quad.hessian_times(g0[p]), g0[q]);
      rep.cross_terms.push_back(ipq);
      if (ipq > 0.0) rep.hessian_negative = false;
      const double denom = norms[p] * norms[q];
      const double gamma = denom > 0.0 ? std::max(0.0, -ipq / denom) : 0.0;
      rep.cross_lhs += gamma * denom + big_l * kernels::dot(g0[p], g0[q]);
    }

  double total = 0.0;
  for (double n : norms) total += n;
  double prefix = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    if (r > 0) {
      const double drift = lips[r] * eta * prefix;
      first += lips[r] * prefix;
      second += 2.0 * norms[r] * drift + drift * drift;
    }
    prefix += norms[r];
  }
  rep.drift_bound = total * first + 0.5 * big_l * second;
  rep.condition_holds = rep.hessian_negative && rep.cross_lhs > rep.drift_bound;
  return rep;
}

QuadraticMTL reference_instance() {
  QuadraticTask a;
  a.hessian = Matrix(2, 2);
  a.hessian(0, 0) = 3.4;
  a.hessian(0, 1) = 2.4;
  a.hessian(1, 0) = 2.4;
  a.hessian(1, 1) = 2.6;
  a.optimum = {-1.0, 2.0};
  QuadraticTask b;
  b.hessian = Matrix(2, 2);
  b.hessian(0, 0) = 0.09;
  b.optimum = {-3.0, 0.0};
  return QuadraticMTL({a, b});
}

QuadraticMTL block_diagonal_instance(std::size_t tasks, std::size_t block, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xb10c));
  std::normal_distribution<double> n01;
  const std::size_t d = tasks * block;
  std::vector<QuadraticTask> out;
  for (std::size_t k = 0; k < tasks; ++k) {
    Eigen::MatrixXd a(block, block);
    for (std::size_t i = 0; i < block; ++i)
      for (std::size_t j = 0; j < block; ++j) a(i, j) = n01(rng);
    const Eigen::MatrixXd h = a * a.transpose() / static_cast<double>(block) +
                              0.1 * Eigen::MatrixXd::Identity(block, block);
    QuadraticTask t;
    t.hessian = Matrix(d, d);
    for (std::size_t i = 0; i < block; ++i)
      for (std::size_t j = 0; j < block; ++j) t.hessian(k * block + i, k * block + j) = h(i, j);
    t.optimum.resize(d);
    for (double& v : t.optimum) v = n01(rng);
    out.push_back(std::move(t));
  }
  return QuadraticMTL(std::move(out));
}

}  // namespace songoku
