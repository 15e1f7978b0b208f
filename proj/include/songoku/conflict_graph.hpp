#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "songoku/grad_stats.hpp"

namespace songoku {

using Edge = std::pair<std::size_t, std::size_t>;

/// Simple undirected graph on K tasks. Edges are stored once with i < j.
class ConflictGraph {
 public:
  ConflictGraph() = default;
  explicit ConflictGraph(std::size_t vertices, double tau = 1.0);

  std::size_t vertices() const { return adjacency_.size(); }
  double tau() const { return tau_; }

  /// Adds (i, j); ignores duplicates. Self-loops throw.
  void add_edge(std::size_t i, std::size_t j);
  bool has_edge(std::size_t i, std::size_t j) const;

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return adjacency_[v]; }
  std::size_t degree(std::size_t v) const { return adjacency_[v].size(); }
  std::vector<std::size_t> degrees() const;

  friend bool operator==(const ConflictGraph& a, const ConflictGraph& b);

 private:
  double tau_ = 1.0;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<Edge> edges_;
};

/// Proper coloring. Colors are 0-based; class c is slot c of the schedule.
struct Coloring {
  std::vector<std::size_t> color_of;
  std::vector<std::vector<std::size_t>> classes;

  std::size_t colors() const { return classes.size(); }
  friend bool operator==(const Coloring&, const Coloring&) = default;
};

/// Color classes plus compatible-slot duplicates added for minimum coverage.
struct AugmentedSchedule {
  std::vector<std::vector<std::size_t>> base_classes;
  std::map<std::size_t, std::vector<std::size_t>> extra_slots;
  std::size_t f_min = 1;
  std::vector<std::size_t> appearances;        // per task, per period
  std::vector<std::size_t> coverage_failures;  // tasks below f_min

  std::size_t period() const { return base_classes.size(); }
  /// Base class of the slot followed by its duplicates.
  std::vector<std::size_t> slot(std::size_t s) const;
  bool coverage_ok() const { return coverage_failures.empty(); }

  friend bool operator==(const AugmentedSchedule&, const AugmentedSchedule&) = default;
};

/// Edge (i, j) iff both tasks are included and rho(i, j) > tau (strict).
ConflictGraph build_graph(const InterferenceMatrix& rho, double tau);

/// Largest-first greedy coloring: non-increasing degree, ties by ascending
/// index, each vertex takes the smallest color absent from colored neighbors.
Coloring welsh_powell(const ConflictGraph& graph);

/// Duplicate under-covered tasks into compatible slots until each task
/// appears f_min times per period. Tasks are served in ascending index and
/// slots are scanned cyclically starting after the task's own slot.
AugmentedSchedule enforce_min_coverage(const Coloring& coloring, const ConflictGraph& graph,
                                       std::size_t f_min);

/// Schedule with a single slot holding every task.
AugmentedSchedule all_tasks_schedule(std::size_t tasks);

std::size_t max_degree(const ConflictGraph& graph);

bool is_proper(const ConflictGraph& graph, const Coloring& coloring);

/// Edge-list text format: first line K, then one "i j" pair per line.
void write_edge_list(std::ostream& out, const ConflictGraph& graph);
ConflictGraph read_edge_list(std::istream& in);

}  // namespace songoku
