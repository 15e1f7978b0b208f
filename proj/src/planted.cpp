#include "songoku/planted.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "songoku/kernels.hpp"

namespace songoku {

namespace {

void fail(const std::string& what) { throw InfeasibleSuite("infeasible planted suite: " + what); }

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

ConflictGraph PlantedTaskSuite::population_graph(double threshold) const {
  ConflictGraph g(tasks, threshold);
  for (std::size_t i = 0; i < tasks; ++i)
    for (std::size_t j = i + 1; j < tasks; ++j) {
      const double c = kernels::dot(mu.row(i), mu.row(j)) /
                       (kernels::norm(mu.row(i)) * kernels::norm(mu.row(j)));
      if (-c > threshold) g.add_edge(i, j);
    }
  return g;
}

PlantedTaskSuite make_planted_suite(const PlantedSpec& spec) {
  const std::size_t k = spec.tasks;
  const std::size_t g = spec.groups;
  if (k < 2) fail("need at least 2 tasks");
  if (g < 2 || g > k) fail("groups must lie in [2, K]");
  if (!(spec.tau > 0.0 && spec.tau <= 1.0)) fail("tau must lie in (0, 1]");
  if (!(spec.gamma > 0.0)) fail("gamma must be positive");
  if (spec.gamma >= 1.0 - spec.tau)
    fail("gamma = " + num(spec.gamma) + " must be < 1 - tau = " + num(1.0 - spec.tau));
  if (!(spec.m0 > 0.0)) fail("m0 must be positive");
  if (!(spec.sigma >= 0.0)) fail("sigma must be >= 0");

  const double cross_needed = (spec.tau + spec.gamma) * static_cast<double>(g - 1);
  if (cross_needed > 1.0)
    fail("(tau + gamma)(groups - 1) = " + num(cross_needed) +
         " > 1; cross-group cosine -(tau + gamma) is not reachable with " + std::to_string(g) +
         " groups");
  double c = spec.within_cos > 0.0 ? spec.within_cos
                                   : std::max(cross_needed, spec.gamma - spec.tau);
  if (c > 1.0) fail("within-group cosine " + num(c) + " exceeds 1");
  if (c < cross_needed)
    fail("cross-group cosine " + num(-c / static_cast<double>(g - 1)) + " > -(tau + gamma) = " +
         num(-(spec.tau + spec.gamma)));
  if (c < spec.gamma - spec.tau)
    fail("within-group cosine " + num(c) + " < -(tau - gamma) = " + num(spec.gamma - spec.tau));

  const std::size_t centre_dims = g == 2 ? 1 : g;
  const bool jitter = c < 1.0;
  const std::size_t need = centre_dims + (jitter ? k : 0);
  if (spec.dim < need)
    fail("dimension " + std::to_string(spec.dim) + " < " + std::to_string(need) +
         " required for " + std::to_string(g) + " groups and " + std::to_string(k) + " tasks");

  PlantedTaskSuite s;
  s.tasks = k;
  s.dim = spec.dim;
  s.sigma = spec.sigma;
  s.tau = spec.tau;
  s.gamma = spec.gamma;
  s.m0 = spec.m0;
  s.seed = spec.seed;
  if (spec.group_of.empty()) {
    s.group_of.resize(k);
    for (std::size_t i = 0; i < k; ++i) s.group_of[i] = i * g / k;
  } else {
    if (spec.group_of.size() != k) fail("group_of must list every task");
    s.group_of = spec.group_of;
    for (std::size_t v : s.group_of)
      if (v >= g) fail("group label out of range");
  }

  // Centres: regular simplex with pairwise cosine -1 / (g - 1).
  Matrix centres(g, centre_dims);
  if (g == 2) {
    centres(0, 0) = 1.0;
    centres(1, 0) = -1.0;
  } else {
    const double inv = 1.0 / static_cast<double>(g);
    const double scale = 1.0 / std::sqrt(1.0 - inv);
    for (std::size_t a = 0; a < g; ++a)
      for (std::size_t b = 0; b < g; ++b) centres(a, b) = ((a == b ? 1.0 : 0.0) - inv) * scale;
  }

  Rng rng(derive_seed(spec.seed, 0x5017e));
  std::vector<std::size_t> perm(spec.dim);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> sign(spec.dim);
  for (double& v : sign) v = coin(rng) ? 1.0 : -1.0;

  const double along = std::sqrt(c);
  const double across = std::sqrt(std::max(0.0, 1.0 - c));
  s.mu = Matrix(k, spec.dim);
  for (std::size_t i = 0; i < k; ++i) {
    Vector raw(spec.dim, 0.0);
    for (std::size_t b = 0; b < centre_dims; ++b) raw[b] = along * centres(s.group_of[i], b);
    if (jitter) raw[centre_dims + i] = across;
    for (std::size_t b = 0; b < spec.dim; ++b) s.mu(i, perm[b]) = spec.m0 * sign[perm[b]] * raw[b];
  }

  const MarginAudit audit = audit_margins(s);
  if (!audit.ok)
    fail("margin audit failed: max cross cosine " + num(audit.max_cross_cos) +
         ", min within cosine " + num(audit.min_within_cos));
  return s;
}

MarginAudit audit_margins(const PlantedTaskSuite& suite) {
  constexpr double kSlack = 1e-12;
  MarginAudit a;
  a.min_norm = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < suite.tasks; ++i) {
    const double ni = kernels::norm(suite.mu.row(i));
    a.min_norm = std::min(a.min_norm, ni);
    for (std::size_t j = i + 1; j < suite.tasks; ++j) {
      const double c = kernels::dot(suite.mu.row(i), suite.mu.row(j)) /
                       (ni * kernels::norm(suite.mu.row(j)));
      if (suite.group_of[i] == suite.group_of[j])
        a.min_within_cos = std::min(a.min_within_cos, c);
      else
        a.max_cross_cos = std::max(a.max_cross_cos, c);
    }
  }
  a.ok = a.max_cross_cos <= -(suite.tau + suite.gamma) + kSlack &&
         a.min_within_cos >= -(suite.tau - suite.gamma) - kSlack &&
         a.min_norm >= suite.m0 * (1.0 - 1e-12);
  return a;
}

void sample_gradient(const PlantedTaskSuite& suite, std::size_t task, Rng& rng,
                     std::span<double> out) {
  if (out.size() != suite.dim) throw DimensionMismatch(out.size(), suite.dim);
  std::normal_distribution<double> n01;
  const auto mu = suite.mu.row(task);
  for (std::size_t i = 0; i < suite.dim; ++i) {
    const double z = suite.sigma > 0.0 ? n01(rng) : 0.0;
    out[i] = mu[i] + suite.sigma * z;
  }
}

Vector sample_gradient(const PlantedTaskSuite& suite, std::size_t task, Rng& rng) {
  Vector v(suite.dim);
  sample_gradient(suite, task, rng, v);
  return v;
}

void write_suite(std::ostream& out, const PlantedTaskSuite& suite) {
  out.precision(17);
  out << suite.tasks << ' ' << suite.dim << ' ' << suite.sigma << ' ' << suite.tau << ' '
      << suite.gamma << ' ' << suite.m0 << '\n';
  for (std::size_t i = 0; i < suite.tasks; ++i) {
    out << suite.group_of[i];
    for (double v : suite.mu.row(i)) out << ' ' << v;
    out << '\n';
  }
}

PlantedTaskSuite read_suite(std::istream& in) {
  PlantedTaskSuite s;
  if (!(in >> s.tasks >> s.dim >> s.sigma >> s.tau >> s.gamma >> s.m0))
    throw std::runtime_error("suite file: bad header");
  s.group_of.resize(s.tasks);
  s.mu = Matrix(s.tasks, s.dim);
  for (std::size_t i = 0; i < s.tasks; ++i) {
    if (!(in >> s.group_of[i])) throw std::runtime_error("suite file: truncated");
    for (std::size_t j = 0; j < s.dim; ++j)
      if (!(in >> s.mu(i, j))) throw std::runtime_error("suite file: truncated");
  }
  return s;
}

PlantedOracle::PlantedOracle(PlantedTaskSuite suite) { phases_.push_back(std::move(suite)); }

PlantedOracle::PlantedOracle(std::vector<PlantedTaskSuite> phases,
                             std::vector<std::size_t> switch_at)
    : phases_(std::move(phases)), switch_at_(std::move(switch_at)) {
  if (phases_.empty() || switch_at_.size() + 1 != phases_.size())
    throw std::invalid_argument("need one switch step between consecutive phases");
  for (const auto& p : phases_)
    if (p.tasks != phases_.front().tasks || p.dim != phases_.front().dim)
      throw std::invalid_argument("phases must share K and d");
  if (!std::is_sorted(switch_at_.begin(), switch_at_.end()))
    throw std::invalid_argument("switch steps must be sorted");
}

const PlantedTaskSuite& PlantedOracle::at(std::size_t step) const {
  const auto it = std::upper_bound(switch_at_.begin(), switch_at_.end(), step);
  return phases_[static_cast<std::size_t>(it - switch_at_.begin())];
}

void PlantedOracle::begin_step(std::size_t step) {
  const auto it = std::upper_bound(switch_at_.begin(), switch_at_.end(), step);
  phase_ = static_cast<std::size_t>(it - switch_at_.begin());
}

void PlantedOracle::gradient(std::size_t task, std::span<const double>, std::span<const double>,
                             Rng& rng, std::span<double> g, std::span<double>) {
  sample_gradient(phases_[phase_], task, rng, g);
}

double PlantedOracle::loss(std::span<const double> theta, const std::vector<Vector>&) const {
  const auto& s = phases_[phase_];
  double total = 0.0;
  for (std::size_t i = 0; i < s.tasks; ++i) total += kernels::dot(s.mu.row(i), theta);
  return total;
}

}  // namespace songoku
