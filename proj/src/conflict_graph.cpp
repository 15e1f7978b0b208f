#include "songoku/conflict_graph.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace songoku {

ConflictGraph::ConflictGraph(std::size_t vertices, double tau)
    : tau_(tau), adjacency_(vertices) {}

void ConflictGraph::add_edge(std::size_t i, std::size_t j) {
  if (i == j) throw std::invalid_argument("self-loop on vertex " + std::to_string(i));
  if (i >= vertices() || j >= vertices()) {
    throw std::out_of_range("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside a graph on " + std::to_string(vertices()) + " vertices");
  }
  if (i > j) std::swap(i, j);
  if (has_edge(i, j)) return;
  adjacency_[i].push_back(j);
  adjacency_[j].push_back(i);
  edges_.emplace_back(i, j);
}

bool ConflictGraph::has_edge(std::size_t i, std::size_t j) const {
  if (i >= vertices() || j >= vertices()) return false;
  const auto& a = adjacency_[i].size() <= adjacency_[j].size() ? adjacency_[i] : adjacency_[j];
  const std::size_t other = &a == &adjacency_[i] ? j : i;
  return std::find(a.begin(), a.end(), other) != a.end();
}

std::vector<std::size_t> ConflictGraph::degrees() const {
  std::vector<std::size_t> d(vertices());
  for (std::size_t v = 0; v < vertices(); ++v) d[v] = degree(v);
  return d;
}

bool operator==(const ConflictGraph& a, const ConflictGraph& b) {
  if (a.vertices() != b.vertices()) return false;
  auto ea = a.edges_;
  auto eb = b.edges_;
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  return ea == eb;
}

std::vector<std::size_t> AugmentedSchedule::slot(std::size_t s) const {
  std::vector<std::size_t> out = base_classes.at(s);
  if (auto it = extra_slots.find(s); it != extra_slots.end()) {
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

ConflictGraph build_graph(const InterferenceMatrix& rho, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("tau must lie in (0, 1], got " + std::to_string(tau));
  }
  const std::size_t k = rho.size();
  ConflictGraph g(k, tau);
  for (std::size_t i = 0; i < k; ++i) {
    if (!rho.included[i]) continue;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (rho.included[j] && rho(i, j) > tau) g.add_edge(i, j);
    }
  }
  return g;
}

Coloring welsh_powell(const ConflictGraph& graph) {
  const std::size_t n = graph.vertices();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return graph.degree(a) > graph.degree(b);
  });

  constexpr std::size_t kUncolored = static_cast<std::size_t>(-1);
  Coloring out;
  out.color_of.assign(n, kUncolored);
  std::vector<char> used;
  for (std::size_t v : order) {
    used.assign(graph.degree(v) + 1, 0);
    for (std::size_t u : graph.neighbors(v)) {
      const std::size_t c = out.color_of[u];
      if (c != kUncolored && c < used.size()) used[c] = 1;
    }
    std::size_t c = 0;
    while (used[c]) ++c;
    out.color_of[v] = c;
    if (c >= out.classes.size()) out.classes.resize(c + 1);
  }
  // Classes list vertices in ascending index.
  for (std::size_t v = 0; v < n; ++v) out.classes[out.color_of[v]].push_back(v);
  return out;
}

AugmentedSchedule enforce_min_coverage(const Coloring& coloring, const ConflictGraph& graph,
                                       std::size_t f_min) {
  if (f_min < 1) throw std::invalid_argument("f_min must be >= 1");
  AugmentedSchedule out;
  out.base_classes = coloring.classes;
  out.f_min = f_min;
  const std::size_t n = graph.vertices();
  const std::size_t m = coloring.colors();
  out.appearances.assign(n, 1);

  for (std::size_t task = 0; task < n; ++task) {
    const std::size_t home = coloring.color_of[task];
    for (std::size_t step = 1; step < m && out.appearances[task] < f_min; ++step) {
      const std::size_t s = (home + step) % m;
      const auto members = out.slot(s);
      const bool compatible = std::none_of(members.begin(), members.end(), [&](std::size_t u) {
        return u == task || graph.has_edge(u, task);
      });
      if (!compatible) continue;
      out.extra_slots[s].push_back(task);
      ++out.appearances[task];
    }
    if (out.appearances[task] < f_min) out.coverage_failures.push_back(task);
  }
  return out;
}

AugmentedSchedule all_tasks_schedule(std::size_t tasks) {
  AugmentedSchedule out;
  std::vector<std::size_t> all(tasks);
  std::iota(all.begin(), all.end(), 0);
  out.base_classes.push_back(std::move(all));
  out.appearances.assign(tasks, 1);
  return out;
}

std::size_t max_degree(const ConflictGraph& graph) {
  std::size_t d = 0;
  for (std::size_t v = 0; v < graph.vertices(); ++v) d = std::max(d, graph.degree(v));
  return d;
}

bool is_proper(const ConflictGraph& graph, const Coloring& coloring) {
  if (coloring.color_of.size() != graph.vertices()) return false;
  for (const auto& [i, j] : graph.edges()) {
    if (coloring.color_of[i] == coloring.color_of[j]) return false;
  }
  return true;
}

void write_edge_list(std::ostream& out, const ConflictGraph& graph) {
  out << graph.vertices() << '\n';
  for (const auto& [i, j] : graph.edges()) out << i << ' ' << j << '\n';
}

ConflictGraph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t k = 0;
  bool have_k = false;
  ConflictGraph g;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (!have_k) {
      if (!(ls >> k)) throw std::invalid_argument("edge list: expected vertex count on line " +
                                                  std::to_string(line_no));
      g = ConflictGraph(k);
      have_k = true;
      continue;
    }
    std::size_t i = 0, j = 0;
    if (!(ls >> i >> j)) {
      throw std::invalid_argument("edge list: malformed pair on line " + std::to_string(line_no));
    }
    g.add_edge(i, j);
  }
  if (!have_k) throw std::invalid_argument("edge list: missing vertex count");
  return g;
}

}  // namespace songoku
