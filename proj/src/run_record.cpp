#include "songoku/run_record.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace songoku {

std::string active_mask_hex(const std::vector<std::size_t>& active, std::size_t tasks) {
  const std::size_t digits = std::max<std::size_t>(1, (tasks + 3) / 4);
  std::string hex(digits, '0');
  for (std::size_t k : active) {
    const std::size_t digit = digits - 1 - k / 4;
    int v = hex[digit] <= '9' ? hex[digit] - '0' : hex[digit] - 'a' + 10;
    v |= 1 << (k % 4);
    hex[digit] = static_cast<char>(v < 10 ? '0' + v : 'a' + v - 10);
  }
  return hex;
}

void write_run_csv(std::ostream& out, const RunRecord& rec) {
  out << "# songoku run csv v" << kRunCsvVersion << " tasks=" << rec.tasks << "\n";
  out << "t,tau,m,active,loss,grad_norm,refresh,window,full_grad_sq,tau_eff,descent_ok\n";
  std::ostringstream row;
  row.precision(17);
  for (const auto& s : rec.steps) {
    row.str({});
    row << s.t << ',' << s.tau << ',' << s.m << ',' << active_mask_hex(s.active, rec.tasks)
        << ',' << s.loss << ',' << s.grad_norm << ',' << (s.refresh ? 1 : 0) << ','
        << s.window << ',' << s.full_grad_sq << ',' << s.tau_eff << ','
        << (s.descent_ok ? 1 : 0) << '\n';
    out << row.str();
  }
}

std::string run_summary_json(const RunRecord& rec, const std::string& config_json) {
  using nlohmann::json;
  json j;
  if (!config_json.empty()) j["config"] = json::parse(config_json);
  j["tasks"] = rec.tasks;
  j["steps"] = rec.steps.size();
  j["combinator"] = rec.combinator;
  j["sketch"] = rec.sketch;
  j["selection"] = rec.cyclic ? "cyclic" : "random_scaled";
  j["multiply_adds"] = rec.multiply_adds;
  std::size_t failures = 0;
  json windows = json::array();
  for (const auto& w : rec.windows) {
    json jw;
    jw["round"] = w.round;
    jw["start"] = w.start;
    jw["tau"] = w.tau;
    jw["degenerate"] = w.degenerate;
    jw["frozen"] = w.frozen;
    jw["max_degree"] = w.max_degree;
    jw["colors"] = w.schedule.period();
    json edges = json::array();
    for (const auto& [a, b] : w.edges) edges.push_back({a, b});
    jw["edges"] = edges;
    jw["classes"] = w.schedule.base_classes;
    json extras = json::object();
    for (const auto& [slot, tasks] : w.schedule.extra_slots) extras[std::to_string(slot)] = tasks;
    jw["extra_slots"] = extras;
    jw["coverage_failures"] = w.schedule.coverage_failures;
    jw["excluded"] = w.excluded;
    failures += w.schedule.coverage_failures.size();
    windows.push_back(std::move(jw));
  }
  j["windows"] = windows;
  j["coverage_failures_total"] = failures;
  if (!rec.steps.empty()) j["final_loss"] = rec.steps.back().loss;
  return j.dump(2);
}

namespace {

ConflictGraph window_graph(const WindowRecord& w, std::size_t tasks) {
  ConflictGraph g(tasks, w.tau);
  for (const auto& [a, b] : w.edges) g.add_edge(a, b);
  return g;
}

}  // namespace

std::vector<std::size_t> max_idle_gaps(const RunRecord& rec) {
  std::vector<std::size_t> gaps(rec.tasks, 0);
  std::vector<std::size_t> last(rec.tasks, 0);
  std::vector<char> seen(rec.tasks, 0);
  std::size_t window = static_cast<std::size_t>(-1);
  for (const auto& s : rec.steps) {
    if (s.window != window) {
      window = s.window;
      std::fill(seen.begin(), seen.end(), 0);
    }
    for (std::size_t k : s.active) {
      if (seen[k]) gaps[k] = std::max(gaps[k], s.t - last[k] - 1);
      seen[k] = 1;
      last[k] = s.t;
    }
  }
  return gaps;
}

AuditReport audit_run(const RunRecord& rec, std::size_t warmup) {
  AuditReport rep;
  std::map<std::size_t, ConflictGraph> graphs;
  for (const auto& w : rec.windows) {
    auto g = window_graph(w, rec.tasks);
    rep.max_degree_seen = std::max(rep.max_degree_seen, max_degree(g));
    for (std::size_t s = 0; s < w.schedule.period(); ++s) {
      const auto members = w.schedule.slot(s);
      for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
          if (g.has_edge(members[a], members[b])) ++rep.slot_violations;
    }
    graphs.emplace(w.round, std::move(g));
  }

  double prev_tau = 1.0;
  for (const auto& s : rec.steps) {
    ++rep.steps_checked;
    if (s.t < warmup ? s.tau != 1.0 : s.tau > prev_tau) ++rep.tau_violations;
    prev_tau = s.tau;
    if (!s.descent_ok) ++rep.descent_violations;
    auto it = graphs.find(s.window);
    if (it == graphs.end()) continue;
    for (std::size_t a = 0; a < s.active.size(); ++a)
      for (std::size_t b = a + 1; b < s.active.size(); ++b)
        if (it->second.has_edge(s.active[a], s.active[b])) ++rep.coscheduled_edges;
  }

  if (!rec.cyclic) return rep;
  // Staleness per window: idle gap <= m - 1 <= Delta.
  std::vector<std::size_t> last(rec.tasks, 0);
  std::vector<char> seen(rec.tasks, 0);
  std::size_t window = static_cast<std::size_t>(-1);
  std::size_t bound = 0;
  for (const auto& s : rec.steps) {
    if (s.window != window) {
      window = s.window;
      std::fill(seen.begin(), seen.end(), 0);
      auto git = graphs.find(window);
      const std::size_t delta = git == graphs.end() ? 0 : max_degree(git->second);
      bound = s.m - 1;
      if (bound > delta) ++rep.gap_violations;
    }
    for (std::size_t k : s.active) {
      if (seen[k]) {
        const std::size_t gap = s.t - last[k] - 1;
        rep.max_gap = std::max(rep.max_gap, gap);
        if (gap > bound) ++rep.gap_violations;
      }
      seen[k] = 1;
      last[k] = s.t;
    }
  }
  return rep;
}

}  // namespace songoku
