#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "songoku/conflict_graph.hpp"

namespace songoku {

inline constexpr int kRunCsvVersion = 1;

struct StepRecord {
  std::size_t t = 0;
  double tau = 1.0;
  std::size_t m = 1;
  std::size_t window = 0;
  std::vector<std::size_t> active;
  double loss = 0.0;
  double grad_norm = 0.0;  // norm of the applied shared-parameter update direction
  bool refresh = false;
  double full_grad_sq = -1.0;  // negative when the oracle cannot report it
  double tau_eff = 0.0;
  bool descent_ok = true;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct WindowRecord {
  std::size_t round = 0;
  std::size_t start = 0;
  double tau = 1.0;
  bool degenerate = false;
  bool frozen = false;
  std::size_t max_degree = 0;
  std::vector<Edge> edges;
  AugmentedSchedule schedule;
  std::vector<std::size_t> excluded;

  friend bool operator==(const WindowRecord&, const WindowRecord&) = default;
};

struct RunRecord {
  std::size_t tasks = 0;
  std::string combinator = "none";
  std::string sketch = "dense";
  bool cyclic = true;  // false under randomized class selection
  std::vector<StepRecord> steps;
  std::vector<WindowRecord> windows;
  std::uint64_t multiply_adds = 0;

  bool empty() const { return steps.empty(); }
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Lowercase hex bitmask, bit k set for task k (most significant digit first).
std::string active_mask_hex(const std::vector<std::size_t>& active, std::size_t tasks);

/// One row per step, preceded by a "# songoku run csv v1" comment line.
void write_run_csv(std::ostream& out, const RunRecord& rec);

/// Windows (graphs, classes, duplicates, coverage failures) plus totals.
/// `config_json` is embedded verbatim as the "config" member when non-empty.
std::string run_summary_json(const RunRecord& rec, const std::string& config_json = {});

struct AuditReport {
  std::size_t steps_checked = 0;
  std::size_t coscheduled_edges = 0;   // active pairs that are edges of the window graph
  std::size_t slot_violations = 0;    // schedule slots containing both ends of an edge
  std::size_t tau_violations = 0;     // warm-up tau != 1 or post-warm-up increases
  std::size_t descent_violations = 0;
  std::size_t gap_violations = 0;     // covered task idle longer than max(m - 1, 0) or Delta
  std::size_t max_gap = 0;
  std::size_t max_degree_seen = 0;

  bool ok() const {
    return coscheduled_edges == 0 && slot_violations == 0 && tau_violations == 0 &&
           descent_violations == 0 && gap_violations == 0;
  }
};

/// Scans a run for co-scheduled conflicts, slot violations, the tau trace, the
/// per-step descent check and, for cyclic runs, the per-window staleness bound.
AuditReport audit_run(const RunRecord& rec, std::size_t warmup);

/// Largest inter-update gap per task inside full periods of each window
/// (number of idle steps between consecutive activations).
std::vector<std::size_t> max_idle_gaps(const RunRecord& rec);

}  // namespace songoku
