#include "songoku/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "songoku/combinators.hpp"
#include "songoku/kernels.hpp"
#include "songoku/planted.hpp"
#include "songoku/scheduler.hpp"

namespace songoku {

std::string to_string(BenchMethod m) {
  switch (m) {
    case BenchMethod::kUniform: return "uniform";
    case BenchMethod::kSongoku: return "songoku";
    case BenchMethod::kSongokuProject: return "songoku+project";
    case BenchMethod::kSongokuScale: return "songoku+scale";
  }
  return "uniform";
}

BenchMethod parse_bench_method(const std::string& name) {
  for (auto m : {BenchMethod::kUniform, BenchMethod::kSongoku, BenchMethod::kSongokuProject,
                 BenchMethod::kSongokuScale})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown bench method '" + name +
                              "' (expected uniform, songoku, songoku+project or songoku+scale)");
}

void BenchConfig::validate() const {
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (dim < 1) throw std::invalid_argument("d must be >= 1");
  if (tasks.empty() || periods.empty() || methods.empty())
    throw std::invalid_argument("bench needs task counts, periods and methods");
}

const BenchRow* BenchResult::find(BenchMethod m, std::size_t tasks, std::size_t period) const {
  for (const auto& r : rows)
    if (r.method == m && r.tasks == tasks && r.period == period) return &r;
  return nullptr;
}

bool BenchResult::fair() const {
  for (const auto& a : rows)
    for (const auto& b : rows)
      if (a.tasks == b.tasks && a.checksum != b.checksum) return false;
  return true;
}

GradientTensor make_gradient_tensor(std::size_t steps, std::size_t tasks, std::size_t dim,
                                    std::uint64_t seed) {
  PlantedSpec spec;
  spec.tasks = tasks;
  spec.dim = dim;
  spec.groups = 2;
  spec.tau = 0.5;
  spec.gamma = 0.1;
  spec.sigma = 0.05;
  spec.seed = seed;
  const PlantedTaskSuite suite = make_planted_suite(spec);

  GradientTensor t;
  t.steps = steps;
  t.tasks = tasks;
  t.dim = dim;
  t.data.resize(steps * tasks * dim);
  Rng rng(derive_seed(seed, tasks));
  Vector g(dim);
  std::size_t pos = 0;
  for (std::size_t s = 0; s < steps; ++s)
    for (std::size_t k = 0; k < tasks; ++k) {
      sample_gradient(suite, k, rng, g);
      for (double v : g) t.data[pos++] = static_cast<float>(v);
    }
  return t;
}

std::uint64_t tensor_checksum(const GradientTensor& t) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(t.data.data());
  const std::size_t n = t.data.size() * sizeof(float);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void load_row(const GradientTensor& grads, std::size_t step, std::size_t task, Matrix& buf) {
  const float* src = grads.at(step, task);
  auto row = buf.row(task);
  for (std::size_t i = 0; i < grads.dim; ++i) row[i] = src[i];
}

double time_uniform(const GradientTensor& grads, double& sink, std::uint64_t* madds) {
  Vector theta(grads.dim, 0.0);
  Vector combined(grads.dim);
  const double eta = 1e-3;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t s = 0; s < grads.steps; ++s) {
    std::fill(combined.begin(), combined.end(), 0.0);
    for (std::size_t k = 0; k < grads.tasks; ++k) {
      const float* g = grads.at(s, k);
      for (std::size_t i = 0; i < grads.dim; ++i) combined[i] += g[i];
    }
    for (std::size_t i = 0; i < grads.dim; ++i) theta[i] -= eta * combined[i];
    sink += kernels::norm(combined);
  }
  const auto stop = std::chrono::steady_clock::now();
  if (madds) *madds = grads.steps * (grads.tasks + 2) * grads.dim;
  return std::chrono::duration<double>(stop - start).count();
}

double time_songoku(BenchMethod method, const GradientTensor& grads, std::size_t period,
                    double tau_star, double beta, std::uint64_t seed, double& sink,
                    std::uint64_t* madds) {
  SchedulerConfig cfg;
  cfg.tau_star = tau_star;
  cfg.refresh_period = period;
  cfg.beta = beta;
  cfg.seed = seed;
  cfg.total_steps = grads.steps;
  SchedulerState st(cfg, grads.tasks, grads.dim, 0);
  st.tau = tau_star;
  AdaptiveScaler scaler(grads.tasks, cfg.combinator.scale_ema_beta, cfg.combinator.scale_floor);
  Matrix buf(grads.tasks, grads.dim);
  Matrix probes(grads.tasks, grads.dim);
  Vector combined(grads.dim);
  std::vector<std::size_t> all(grads.tasks);
  std::iota(all.begin(), all.end(), 0);
  const double eta = 1e-3;
  std::uint64_t count = 0;

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < grads.tasks; ++k) load_row(grads, 0, k, probes);
  refresh(st, cfg, probes, 0);
  count += grads.tasks * grads.dim;
  for (std::size_t s = 0; s < grads.steps; ++s) {
    const auto active = active_set(st, s);
    for (std::size_t k : active) load_row(grads, s, k, buf);
    st.stats.update_rows(buf, active);
    count += 2 * active.size() * grads.dim;
    if (method == BenchMethod::kSongoku) {
      kernels::sum_rows(buf, active, combined);
    } else {
      std::vector<Vector> group;
      group.reserve(active.size());
      for (std::size_t k : active) group.emplace_back(buf.row(k).begin(), buf.row(k).end());
      if (method == BenchMethod::kSongokuProject) {
        group = project_within_group(group, st.rng);
        count += active.size() * active.size() * 2 * grads.dim;
      } else {
        for (std::size_t a = 0; a < active.size(); ++a) group[a] = scaler.scale(active[a], group[a]);
        count += 2 * active.size() * grads.dim;
      }
      std::fill(combined.begin(), combined.end(), 0.0);
      for (const auto& g : group)
        for (std::size_t i = 0; i < grads.dim; ++i) combined[i] += g[i];
    }
    for (std::size_t i = 0; i < grads.dim; ++i) st.theta[i] -= eta * combined[i];
    sink += kernels::norm(combined);
    if ((s + 1) % period == 0 && s + 1 < grads.steps) {
      for (std::size_t k = 0; k < grads.tasks; ++k) load_row(grads, s, k, probes);
      refresh(st, cfg, probes, s + 1);
      count += grads.tasks * grads.dim;
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  if (madds) *madds = count + st.builder.flops().multiply_adds;
  return std::chrono::duration<double>(stop - start).count();
}

void summarize(BenchRow& row) {
  const double n = static_cast<double>(row.samples.size());
  row.mean_seconds = std::accumulate(row.samples.begin(), row.samples.end(), 0.0) / n;
  double var = 0.0;
  for (double v : row.samples) var += (v - row.mean_seconds) * (v - row.mean_seconds);
  row.std_seconds = row.samples.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
}

}  // namespace

double time_method(BenchMethod method, const GradientTensor& grads, std::size_t period,
                   double tau_star, double beta, std::uint64_t seed, double& sink,
                   std::uint64_t* multiply_adds) {
  if (method == BenchMethod::kUniform) return time_uniform(grads, sink, multiply_adds);
  return time_songoku(method, grads, period, tau_star, beta, seed, sink, multiply_adds);
}

BenchResult run_bench(const BenchConfig& cfg) {
  cfg.validate();
  BenchResult res;
  for (std::size_t k : cfg.tasks) {
    const GradientTensor grads = make_gradient_tensor(cfg.steps, k, cfg.dim, cfg.seed);
    for (BenchMethod m : cfg.methods) {
      const std::vector<std::size_t> periods =
          m == BenchMethod::kUniform ? std::vector<std::size_t>{0} : cfg.periods;
      for (std::size_t r : periods) {
        BenchRow row;
        row.method = m;
        row.tasks = k;
        row.period = r;
        row.checksum = tensor_checksum(grads);
        for (std::size_t rep = 0; rep < cfg.repeats; ++rep)
          row.samples.push_back(time_method(m, grads, r, cfg.tau_star, cfg.beta,
                                            derive_seed(cfg.seed, rep), row.sink,
                                            &row.multiply_adds));
        summarize(row);
        res.rows.push_back(std::move(row));
      }
    }
  }
  return res;
}

void write_bench_csv(std::ostream& out, const BenchResult& res) {
  out << "# songoku bench csv v1\n";
  out << "method,K,R,repeats,mean_s,std_s,multiply_adds,checksum\n";
  out.precision(9);
  for (const auto& r : res.rows) {
    out << to_string(r.method) << ',' << r.tasks << ',' << r.period << ',' << r.samples.size()
        << ',' << r.mean_seconds << ',' << r.std_seconds << ',' << r.multiply_adds << ','
        << std::hex << r.checksum << std::dec << '\n';
  }
}

BenchTrends bench_trends(const BenchResult& res, std::size_t fixed_r, std::size_t fixed_k) {
  BenchTrends tr;
  tr.trend_k = fixed_k;
  tr.trend_r = fixed_r;
  std::vector<std::pair<std::size_t, double>> song;
  std::vector<double> uni;
  for (const auto& r : res.rows) {
    if (r.method == BenchMethod::kSongoku && r.period == fixed_r) song.emplace_back(r.tasks, r.mean_seconds);
    if (r.method == BenchMethod::kUniform) uni.push_back(r.mean_seconds);
  }
  std::sort(song.begin(), song.end());
  tr.songoku_increasing_in_k = song.size() >= 2;
  for (std::size_t i = 1; i < song.size(); ++i)
    if (!(song[i].second > song[i - 1].second)) tr.songoku_increasing_in_k = false;
  if (!uni.empty()) {
    const auto [lo, hi] = std::minmax_element(uni.begin(), uni.end());
    tr.uniform_ratio = *hi / *lo;
  }
  std::vector<std::pair<std::size_t, double>> by_r;
  for (const auto& r : res.rows)
    if (r.method == BenchMethod::kSongoku && r.tasks == fixed_k) by_r.emplace_back(r.period, r.mean_seconds);
  std::sort(by_r.begin(), by_r.end());
  tr.songoku_nonincreasing_in_r = by_r.size() >= 2;
  for (std::size_t i = 1; i < by_r.size(); ++i)
    if (by_r[i].second > by_r[i - 1].second) tr.songoku_nonincreasing_in_r = false;
  return tr;
}

}  // namespace songoku
