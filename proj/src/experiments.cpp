#include "songoku/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "songoku/bench.hpp"
#include "songoku/content_hash.hpp"
#include "songoku/convergence.hpp"
#include "songoku/quadratic.hpp"
#include "songoku/recovery.hpp"
#include "songoku/scheduler.hpp"

namespace songoku {

using nlohmann::json;

namespace {

std::string joined_names() {
  std::string out;
  for (const auto& n : experiment_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

std::filesystem::path out_file(const AppConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  return std::filesystem::path(cfg.out) / name;
}

void write_text(const AppConfig& cfg, const std::string& name, const std::string& text) {
  std::ofstream f(out_file(cfg, name));
  if (!f) throw std::runtime_error("cannot write " + out_file(cfg, name).string());
  f << text;
}

json base_summary(const AppConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["config"] = json::parse(config_json(cfg));
  j["input_hash"] = git_blob_hash(emit_config(cfg));
  return j;
}

std::string finish(const AppConfig& cfg, const json& j) {
  const std::string text = j.dump(2) + "\n";
  write_text(cfg, "summary.json", text);
  return text;
}

json audit_json(const AuditReport& a) {
  return {{"steps_checked", a.steps_checked}, {"coscheduled_edges", a.coscheduled_edges},
          {"slot_violations", a.slot_violations}, {"tau_violations", a.tau_violations},
          {"descent_violations", a.descent_violations}, {"gap_violations", a.gap_violations},
          {"max_gap", a.max_gap}, {"max_degree", a.max_degree_seen}, {"ok", a.ok()}};
}

std::vector<std::vector<std::size_t>> partition_of(const AugmentedSchedule& s) {
  auto classes = s.base_classes;
  for (auto& c : classes) std::sort(c.begin(), c.end());
  std::sort(classes.begin(), classes.end());
  return classes;
}

bool annealed(const WindowRecord& w, double tau_star) {
  return !w.frozen && std::abs(w.tau - tau_star) <= 1e-12;
}

std::string run_planted(const AppConfig& cfg, bool staleness) {
  PlantedOracle oracle(make_planted_suite(planted_spec(cfg)));
  const RunRecord rec = run(cfg.scheduler, oracle);
  const AuditReport audit = audit_run(rec, cfg.scheduler.warmup);
  {
    std::ofstream f(out_file(cfg, "run.csv"));
    write_run_csv(f, rec);
  }
  json j = base_summary(cfg);
  j["run"] = json::parse(run_summary_json(rec));
  j["audit"] = audit_json(audit);
  if (staleness) {
    const auto gaps = max_idle_gaps(rec);
    j["max_gap_per_task"] = gaps;
    j["max_degree"] = audit.max_degree_seen;
    j["staleness_ok"] = audit.gap_violations == 0;
  }
  const std::string text = finish(cfg, j);
  if (staleness && audit.gap_violations != 0)
    throw std::runtime_error("staleness audit failed: " + std::to_string(audit.gap_violations) +
                             " gap violation(s)");
  return text;
}

std::string run_recovery_curve(const AppConfig& cfg) {
  const PlantedTaskSuite suite = make_planted_suite(planted_spec(cfg));
  const double c = cfg.recovery_constant > 0.0 ? cfg.recovery_constant : kRecoveryConstant;
  const double needed = required_neff(c > 0.0 ? c : 1.0, std::max(cfg.sigma, 1e-12), cfg.m0,
                                      cfg.gamma, cfg.tasks, cfg.delta);
  const std::vector<double> factors{0.01, 0.1, 0.3, 1.0, 3.0};
  std::ofstream csv(out_file(cfg, "recovery_curve.csv"));
  csv << "# songoku recovery csv v1\nn_eff,beta,R,trial,success\n";
  json points = json::array();
  for (std::size_t p = 0; p < factors.size(); ++p) {
    const EmaPlan plan = ema_plan_for(factors[p] * needed);
    const auto res = recovery_experiment(suite, plan, cfg.scheduler.tau_star, cfg.trials,
                                         derive_seed(cfg.scheduler.seed, p));
    for (std::size_t t = 0; t < res.trials; ++t)
      csv << plan.n_eff << ',' << plan.beta << ',' << plan.window << ',' << t << ','
          << res.diagnostics[t] << '\n';
    points.push_back({{"n_eff", plan.n_eff}, {"beta", plan.beta}, {"R", plan.window},
                      {"rate", res.rate()}, {"lower", res.lower()}, {"upper", res.upper()}});
  }
  json j = base_summary(cfg);
  j["constant"] = c;
  j["required_n_eff"] = needed;
  j["points"] = points;
  return finish(cfg, j);
}

std::string run_sched_vs_agg(const AppConfig& cfg) {
  const QuadraticMTL quad = reference_instance();
  const Groups groups{{0}, {1}};
  const double eta = 1.0 / quad.smoothness();
  const auto rep = improvement_report(quad, Vector(2, 0.0), groups, eta);
  double block_diff = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const QuadraticMTL b = block_diagonal_instance(3, 3, derive_seed(cfg.scheduler.seed, s));
    Groups g{{0}, {1}, {2}};
    Vector x(b.dim(), 0.5);
    const double e = 1.0 / b.smoothness();
    const Vector a = aggregated_step(b, x, g, e);
    const Vector r = scheduled_refresh(b, x, g, e);
    for (std::size_t i = 0; i < a.size(); ++i) block_diff = std::max(block_diff, std::abs(a[i] - r[i]));
  }
  std::ofstream csv(out_file(cfg, "sched_vs_agg.csv"));
  csv.precision(17);
  csv << "# songoku sched_vs_agg csv v1\nquantity,value\n"
      << "f_aggregated," << rep.f_aggregated << "\nf_scheduled," << rep.f_scheduled
      << "\ncross_lhs," << rep.cross_lhs << "\ndrift_bound," << rep.drift_bound
      << "\nblock_max_diff," << block_diff << "\n";
  json j = base_summary(cfg);
  j["eta"] = eta;
  j["L"] = quad.smoothness();
  j["f_aggregated"] = rep.f_aggregated;
  j["f_scheduled"] = rep.f_scheduled;
  j["improvement"] = rep.f_aggregated - rep.f_scheduled;
  j["cross_terms"] = rep.cross_terms;
  j["cross_lhs"] = rep.cross_lhs;
  j["drift_bound"] = rep.drift_bound;
  j["condition_holds"] = rep.condition_holds;
  j["block_diagonal_max_diff"] = block_diff;
  return finish(cfg, j);
}

std::string run_convergence(const AppConfig& cfg) {
  ConvergenceSpec spec;
  spec.seeds = cfg.seeds;
  spec.scheduler = cfg.scheduler;
  spec.scheduler.selection = ClassSelection::kRandomScaled;
  spec.scheduler.warmup = 0;
  spec.problem.seed = cfg.scheduler.seed;
  const ConvergenceResult tuned = convergence_experiment(spec);
  spec.scheduler.tau_star = 1.0;
  const ConvergenceResult uniform = convergence_experiment(spec);

  std::ofstream csv(out_file(cfg, "convergence.csv"));
  csv.precision(17);
  csv << "# songoku convergence csv v1\nvariant,T,mean_min_grad_sq\n";
  for (std::size_t i = 0; i < tuned.horizons.size(); ++i)
    csv << "tau_star," << tuned.horizons[i] << ',' << tuned.mean_min_grad_sq[i] << '\n';
  for (std::size_t i = 0; i < uniform.horizons.size(); ++i)
    csv << "tau_one," << uniform.horizons[i] << ',' << uniform.mean_min_grad_sq[i] << '\n';
  json j = base_summary(cfg);
  j["horizons"] = tuned.horizons;
  j["tau_star"] = {{"mean_min_grad_sq", tuned.mean_min_grad_sq}, {"slope", tuned.slope}};
  j["tau_one"] = {{"mean_min_grad_sq", uniform.mean_min_grad_sq}, {"slope", uniform.slope}};
  return finish(cfg, j);
}

std::string run_ablation_singlestep(const AppConfig& cfg) {
  const auto res = ablation_singlestep(cfg, 5);
  std::ofstream csv(out_file(cfg, "ablation_singlestep.csv"));
  csv << "# songoku ablation csv v1\nvariant,instability,recovery\n"
      << "full_history," << res.instability_full << ',' << res.recovery_full << '\n'
      << "single_step," << res.instability_single << ',' << res.recovery_single << '\n';
  json j = base_summary(cfg);
  j["instability_full"] = res.instability_full;
  j["instability_single"] = res.instability_single;
  j["recovery_full"] = res.recovery_full;
  j["recovery_single"] = res.recovery_single;
  return finish(cfg, j);
}

std::string run_ablation_static(const AppConfig& cfg) {
  const auto res = ablation_static(cfg);
  std::ofstream csv(out_file(cfg, "ablation_static.csv"));
  csv << "# songoku ablation csv v1\nvariant,stale_edge_violations\n"
      << "static," << res.violations_static << "\ndynamic," << res.violations_dynamic << '\n';
  json j = base_summary(cfg);
  j["switch_step"] = res.switch_step;
  j["counted_from"] = res.counted_from;
  j["violations_static"] = res.violations_static;
  j["violations_dynamic"] = res.violations_dynamic;
  return finish(cfg, j);
}

std::string run_bench_experiment(const AppConfig& cfg) {
  BenchConfig b;
  b.tasks = cfg.bench_tasks;
  b.periods = cfg.bench_periods;
  b.dim = cfg.bench_dim;
  b.steps = cfg.bench_steps;
  b.repeats = cfg.repeats;
  b.seed = cfg.scheduler.seed;
  b.tau_star = cfg.scheduler.tau_star;
  b.beta = cfg.scheduler.beta;
  const BenchResult res = run_bench(b);
  {
    std::ofstream f(out_file(cfg, "bench.csv"));
    write_bench_csv(f, res);
  }
  const std::size_t fixed_r =
      std::find(b.periods.begin(), b.periods.end(), 32) != b.periods.end() ? 32 : b.periods.front();
  const std::size_t fixed_k = *std::max_element(b.tasks.begin(), b.tasks.end());
  const BenchTrends tr = bench_trends(res, fixed_r, fixed_k);
  json rows = json::array();
  for (const auto& r : res.rows)
    rows.push_back({{"method", to_string(r.method)}, {"K", r.tasks}, {"R", r.period},
                    {"mean_s", r.mean_seconds}, {"std_s", r.std_seconds},
                    {"multiply_adds", r.multiply_adds}, {"checksum", r.checksum}});
  json j = base_summary(cfg);
  j["rows"] = rows;
  j["fair"] = res.fair();
  j["trends"] = {{"fixed_R", fixed_r}, {"fixed_K", fixed_k},
                 {"songoku_increasing_in_K", tr.songoku_increasing_in_k},
                 {"uniform_ratio", tr.uniform_ratio},
                 {"songoku_nonincreasing_in_R", tr.songoku_nonincreasing_in_r}};
  return finish(cfg, j);
}

}  // namespace

UnknownExperiment::UnknownExperiment(const std::string& name)
    : std::invalid_argument("unknown experiment '" + name + "'; available: " + joined_names()) {}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "run",         "bench",           "recovery_curve",      "sched_vs_agg",
      "convergence", "ablation_static", "ablation_singlestep", "staleness_audit"};
  return names;
}

PlantedSpec planted_spec(const AppConfig& cfg) {
  PlantedSpec s;
  s.tasks = cfg.tasks;
  s.dim = cfg.dim;
  s.groups = cfg.groups;
  s.tau = cfg.scheduler.tau_star;
  s.gamma = cfg.gamma;
  s.sigma = cfg.sigma;
  s.m0 = cfg.m0;
  s.seed = cfg.scheduler.seed;
  return s;
}

double partition_instability(const RunRecord& rec, double tau_star) {
  std::size_t compared = 0;
  std::size_t changed = 0;
  const WindowRecord* prev = nullptr;
  for (const auto& w : rec.windows) {
    if (!annealed(w, tau_star)) continue;
    if (prev) {
      ++compared;
      if (partition_of(prev->schedule) != partition_of(w.schedule)) ++changed;
    }
    prev = &w;
  }
  return compared ? static_cast<double>(changed) / static_cast<double>(compared) : 0.0;
}

double window_recovery_rate(const RunRecord& rec, const ConflictGraph& population,
                            double tau_star) {
  auto truth = population.edges();
  std::sort(truth.begin(), truth.end());
  std::size_t n = 0;
  std::size_t hits = 0;
  for (const auto& w : rec.windows) {
    if (!annealed(w, tau_star)) continue;
    ++n;
    if (w.edges == truth) ++hits;
  }
  return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
}

std::size_t stale_edge_violations(const RunRecord& rec, const PlantedOracle& oracle, double tau,
                                  std::size_t from) {
  std::size_t count = 0;
  for (const auto& s : rec.steps) {
    if (s.t < from) continue;
    const ConflictGraph g = oracle.at(s.t).population_graph(tau);
    bool bad = false;
    for (std::size_t a = 0; a < s.active.size() && !bad; ++a)
      for (std::size_t b = a + 1; b < s.active.size() && !bad; ++b)
        bad = g.has_edge(s.active[a], s.active[b]);
    if (bad) ++count;
  }
  return count;
}

SingleStepAblation ablation_singlestep(const AppConfig& cfg, std::size_t runs) {
  SingleStepAblation out;
  out.runs = runs;
  const double tau = cfg.scheduler.tau_star;
  for (std::size_t r = 0; r < runs; ++r) {
    PlantedSpec spec = planted_spec(cfg);
    spec.seed = derive_seed(cfg.scheduler.seed, 100 + r);
    const PlantedTaskSuite suite = make_planted_suite(spec);
    const ConflictGraph truth = suite.population_graph(tau);
    for (int single = 0; single < 2; ++single) {
      SchedulerConfig sc = cfg.scheduler;
      sc.seed = derive_seed(cfg.scheduler.seed, 200 + r);
      sc.sketch.seed = sc.seed;
      if (single) sc.beta = 0.0;
      PlantedOracle oracle(suite);
      RunRecord rec = run(sc, oracle);
      const double inst = partition_instability(rec, tau);
      const double recov = window_recovery_rate(rec, truth, tau);
      (single ? out.instability_single : out.instability_full) += inst / static_cast<double>(runs);
      (single ? out.recovery_single : out.recovery_full) += recov / static_cast<double>(runs);
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

StaticAblation ablation_static(const AppConfig& cfg) {
  StaticAblation out;
  const std::size_t period = cfg.scheduler.refresh_period;
  const std::size_t total = cfg.scheduler.total_steps;
  out.switch_step = (total / 2) / period * period;
  out.counted_from = out.switch_step + 2 * period;

  PlantedSpec a = planted_spec(cfg);
  PlantedSpec b = a;
  const std::size_t stride = std::max<std::size_t>(1, cfg.tasks / (2 * cfg.groups));
  b.group_of.resize(cfg.tasks);
  for (std::size_t i = 0; i < cfg.tasks; ++i) b.group_of[i] = (i / stride) % cfg.groups;
  b.seed = a.seed;
  std::vector<PlantedTaskSuite> phases{make_planted_suite(a), make_planted_suite(b)};

  for (int frozen = 1; frozen >= 0; --frozen) {
    SchedulerConfig sc = cfg.scheduler;
    sc.freeze_first_coloring = frozen != 0;
    PlantedOracle oracle(phases, {out.switch_step});
    RunRecord rec = run(sc, oracle);
    const std::size_t v = stale_edge_violations(rec, oracle, cfg.scheduler.tau_star, out.counted_from);
    (frozen ? out.violations_static : out.violations_dynamic) = v;
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::string run_experiment(const AppConfig& cfg) {
  cfg.validate();
  const std::string& n = cfg.experiment;
  if (n == "run") return run_planted(cfg, false);
  if (n == "staleness_audit") return run_planted(cfg, true);
  if (n == "recovery_curve") return run_recovery_curve(cfg);
  if (n == "sched_vs_agg") return run_sched_vs_agg(cfg);
  if (n == "convergence") return run_convergence(cfg);
  if (n == "ablation_singlestep") return run_ablation_singlestep(cfg);
  if (n == "ablation_static") return run_ablation_static(cfg);
  if (n == "bench") return run_bench_experiment(cfg);
  throw UnknownExperiment(n);
}

}  // namespace songoku
