#include "songoku/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "songoku/descent.hpp"
#include "songoku/kernels.hpp"

namespace songoku {

std::string to_string(StepRule rule) {
  return rule == StepRule::kConstant ? "constant" : "inverse_sqrt_t";
}

std::string to_string(ClassSelection sel) {
  return sel == ClassSelection::kCyclic ? "cyclic" : "random_scaled";
}

void SchedulerConfig::validate() const {
  if (!(tau_star > 0.0 && tau_star <= 1.0))
    throw ConfigError("tau_star", "must lie in (0, 1], got " + std::to_string(tau_star));
  if (refresh_period < 1) throw ConfigError("R", "must be >= 1");
  if (!(beta >= 0.0 && beta < 1.0))
    throw ConfigError("beta", "must lie in [0, 1), got " + std::to_string(beta));
  if (f_min < 1) throw ConfigError("f_min", "must be >= 1");
  if (!(norm_floor >= 0.0)) throw ConfigError("norm_floor", "must be >= 0");
  if (!(step_size > 0.0)) throw ConfigError("eta", "must be positive");
  if (!(anneal.curvature > 0.0)) throw ConfigError("anneal_curvature", "must be positive");
  if (total_steps > 0 && warmup >= total_steps)
    throw ConfigError("T_warm", "must be smaller than T (" + std::to_string(total_steps) + ")");
  if (sketch.fd_rows < 1) throw ConfigError("fd_rows", "must be >= 1");
  if (!(sketch.epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
  if (!(combinator.scale_floor > 0.0)) throw ConfigError("scale_floor", "must be positive");
  if (!(combinator.scale_ema_beta >= 0.0 && combinator.scale_ema_beta < 1.0))
    throw ConfigError("scale_ema_beta", "must lie in [0, 1)");
}

double SchedulerConfig::eta() const {
  if (step_rule == StepRule::kConstant || total_steps == 0) return step_size;
  return step_size / std::sqrt(static_cast<double>(total_steps));
}

void GradientOracle::probe(std::size_t task, std::span<const double> theta,
                           std::span<const double> head, Rng& rng, std::span<double> g) {
  Vector h(head_dim(), 0.0);
  gradient(task, theta, head, rng, g, h);
}

SchedulerState::SchedulerState(const SchedulerConfig& cfg, std::size_t tasks, std::size_t dim,
                               std::size_t head_dim)
    : schedule(all_tasks_schedule(tasks)),
      graph(tasks, 1.0),
      stats(tasks, dim, cfg.beta, cfg.norm_floor),
      theta(dim, 0.0),
      heads(tasks, Vector(head_dim, 0.0)),
      builder(cfg.sketch),
      rng(derive_seed(cfg.seed, 0)) {}

double anneal_tau(std::size_t t, const SchedulerConfig& cfg) {
  if (t < cfg.warmup) return 1.0;
  const double span = static_cast<double>(cfg.anneal_horizon());
  const double u = std::min(static_cast<double>(t - cfg.warmup) / span, 1.0);
  if (u >= 1.0) return cfg.tau_star;
  const double a = cfg.anneal.curvature;
  return 1.0 - (1.0 - cfg.tau_star) * std::log1p(a * u) / std::log1p(a);
}

std::vector<std::size_t> active_set(const SchedulerState& state, std::size_t t) {
  const std::size_t m = state.period();
  if (m == 0) return {};
  auto members = state.schedule.slot((t - state.round_start) % m);
  std::sort(members.begin(), members.end());
  return members;
}

void apply_update(SchedulerState& state, std::span<const std::size_t> active,
                  std::span<const TaskGradient> grads, double eta) {
  std::set<std::size_t> wanted(active.begin(), active.end());
  std::set<std::size_t> given;
  for (const auto& g : grads) {
    if (!wanted.count(g.task))
      throw std::invalid_argument("gradient supplied for inactive task " + std::to_string(g.task));
    if (!given.insert(g.task).second)
      throw std::invalid_argument("duplicate gradient for task " + std::to_string(g.task));
    if (g.shared.size() != state.theta.size())
      throw DimensionMismatch(g.shared.size(), state.theta.size());
    if (g.head.size() != state.heads[g.task].size())
      throw DimensionMismatch(g.head.size(), state.heads[g.task].size());
  }
  for (std::size_t k : wanted)
    if (!given.count(k))
      throw std::invalid_argument("missing gradient for active task " + std::to_string(k));

  for (const auto& g : grads) {
    for (std::size_t i = 0; i < state.theta.size(); ++i) state.theta[i] -= eta * g.shared[i];
    auto& phi = state.heads[g.task];
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= eta * g.head[i];
  }
}

WindowRecord refresh(SchedulerState& state, const SchedulerConfig& cfg, const Matrix& probes,
                     std::size_t next_start) {
  std::vector<std::size_t> all(state.tasks());
  std::iota(all.begin(), all.end(), 0);
  state.stats.update_rows(probes, all);

  WindowRecord w;
  w.tau = state.tau;
  if (!state.frozen) {
    GraphBuild built = state.builder.build(state.stats, state.tau, state.round + 1);
    w.degenerate = built.degenerate;
    if (built.degenerate) {
      state.graph = ConflictGraph(state.tasks(), state.tau);
      state.schedule = all_tasks_schedule(state.tasks());
    } else {
      state.graph = std::move(built.graph);
      Coloring col = welsh_powell(state.graph);
      if (cfg.permute_classes) std::shuffle(col.classes.begin(), col.classes.end(), state.rng);
      for (std::size_t c = 0; c < col.classes.size(); ++c)
        for (std::size_t v : col.classes[c]) col.color_of[v] = c;
      state.schedule = enforce_min_coverage(col, state.graph, cfg.f_min);
      if (cfg.freeze_first_coloring && state.tau < 1.0) state.frozen = true;
    }
  } else {
    w.frozen = true;
    w.tau = state.graph.tau();
  }
  ++state.round;
  state.round_start = next_start;

  w.round = state.round;
  w.start = next_start;
  w.edges = state.graph.edges();
  std::sort(w.edges.begin(), w.edges.end());
  w.max_degree = max_degree(state.graph);
  w.schedule = state.schedule;
  for (std::size_t k = 0; k < state.tasks(); ++k)
    if (state.stats.excluded(k)) w.excluded.push_back(k);
  return w;
}

namespace {

Matrix collect_probes(GradientOracle& oracle, SchedulerState& st) {
  Matrix probes(oracle.tasks(), oracle.dim());
  for (std::size_t k = 0; k < oracle.tasks(); ++k)
    oracle.probe(k, st.theta, st.heads[k], st.rng, probes.row(k));
  return probes;
}

}  // namespace

RunRecord run(const SchedulerConfig& cfg, GradientOracle& oracle) {
  cfg.validate();
  RunRecord rec;
  rec.tasks = oracle.tasks();
  rec.combinator = to_string(cfg.combinator.mode);
  rec.sketch = to_string(cfg.sketch.mode);
  rec.cyclic = cfg.selection == ClassSelection::kCyclic;
  if (cfg.total_steps == 0) return rec;

  const std::size_t k_tasks = oracle.tasks();
  const std::size_t dim = oracle.dim();
  const std::size_t hdim = oracle.head_dim();
  SchedulerState st(cfg, k_tasks, dim, hdim);
  st.theta = oracle.initial_theta();
  if (st.theta.size() != dim) throw DimensionMismatch(st.theta.size(), dim);

  const bool project = cfg.combinator.mode == CombinatorMode::kProject ||
                       cfg.combinator.mode == CombinatorMode::kProjectAndScale;
  const bool scale = cfg.combinator.mode == CombinatorMode::kAdaptiveScale ||
                     cfg.combinator.mode == CombinatorMode::kProjectAndScale;
  AdaptiveScaler scaler(k_tasks, cfg.combinator.scale_ema_beta, cfg.combinator.scale_floor);
  const double eta = cfg.eta();

  // Round 0 opens with the all-task class at tau = 1.
  st.tau = 1.0;
  oracle.begin_step(0);
  {
    WindowRecord w0 = refresh(st, cfg, collect_probes(oracle, st), 0);
    w0.round = 0;
    st.round = 0;
    rec.windows.push_back(std::move(w0));
  }

  Matrix step_grads(k_tasks, dim);
  for (std::size_t t = 0; t < cfg.total_steps; ++t) {
    if (t > 0) oracle.begin_step(t);
    st.tau = anneal_tau(t, cfg);

    StepRecord s;
    s.t = t;
    s.tau = st.tau;
    s.window = st.round;
    std::vector<std::size_t> active;
    double weight = 1.0;
    if (cfg.selection == ClassSelection::kRandomScaled) {
      const std::size_t m = st.schedule.period();
      std::uniform_int_distribution<std::size_t> pick(0, m - 1);
      active = st.schedule.base_classes[pick(st.rng)];
      weight = static_cast<double>(m);
    } else {
      active = active_set(st, t);
    }
    s.m = st.schedule.period();
    s.active = active;
    s.full_grad_sq = oracle.full_gradient_norm_sq(st.theta, st.heads);

    std::vector<Vector> shared(active.size(), Vector(dim, 0.0));
    std::vector<TaskGradient> grads(active.size());
    for (std::size_t a = 0; a < active.size(); ++a) {
      const std::size_t k = active[a];
      grads[a].task = k;
      grads[a].head.assign(hdim, 0.0);
      oracle.gradient(k, st.theta, st.heads[k], st.rng, shared[a], grads[a].head);
      step_grads.set_row(k, shared[a]);
    }
    st.stats.update_rows(step_grads, active);

    if (project) shared = project_within_group(shared, st.rng);
    if (scale)
      for (std::size_t a = 0; a < active.size(); ++a) shared[a] = scaler.scale(active[a], shared[a]);

    const DescentCheck dc = descent_check(shared, st.tau);
    s.tau_eff = dc.tau_eff;
    s.descent_ok = dc.ok;
    s.grad_norm = std::sqrt(dc.lhs) * weight;

    for (std::size_t a = 0; a < active.size(); ++a) {
      for (double& v : shared[a]) v *= weight;
      for (double& v : grads[a].head) v *= weight;
      grads[a].shared = std::move(shared[a]);
    }
    apply_update(st, active, grads, eta);
    s.loss = oracle.loss(st.theta, st.heads);

    if ((t + 1) % cfg.refresh_period == 0 && t + 1 < cfg.total_steps) {
      s.refresh = true;
      rec.windows.push_back(refresh(st, cfg, collect_probes(oracle, st), t + 1));
    }
    rec.steps.push_back(std::move(s));
  }
  rec.multiply_adds = st.builder.flops().multiply_adds;
  return rec;
}

}  // namespace songoku
