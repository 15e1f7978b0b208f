#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "songoku/conflict_graph.hpp"
#include "songoku/rng.hpp"

using namespace songoku;

namespace {

ConflictGraph graph_of(std::size_t k, std::initializer_list<Edge> edges) {
  ConflictGraph g(k, 0.5);
  for (auto [i, j] : edges) g.add_edge(i, j);
  return g;
}

InterferenceMatrix rho_of(std::size_t k) {
  InterferenceMatrix r{Matrix(k, k), std::vector<bool>(k, true)};
  return r;
}

bool colorable(const ConflictGraph& g, std::size_t colors) {
  const std::size_t k = g.vertices();
  std::vector<std::size_t> c(k, 0);
  while (true) {
    bool ok = true;
    for (const auto& [i, j] : g.edges())
      if (c[i] == c[j]) { ok = false; break; }
    if (ok) return true;
    std::size_t pos = 0;
    while (pos < k && ++c[pos] == colors) c[pos++] = 0;
    if (pos == k) return false;
  }
}

std::size_t chromatic_number(const ConflictGraph& g) {
  for (std::size_t c = 1;; ++c)
    if (colorable(g, c)) return c;
}

}  // namespace

TEST_CASE("build_graph uses a strict threshold") {
  auto r = rho_of(2);
  r.rho(0, 1) = r.rho(1, 0) = 0.6;
  CHECK(build_graph(r, 0.5).has_edge(0, 1));
  r.rho(0, 1) = r.rho(1, 0) = 0.5;
  CHECK_FALSE(build_graph(r, 0.5).has_edge(0, 1));
}

TEST_CASE("K=3 path from interference values") {
  auto r = rho_of(3);
  r.rho(0, 1) = r.rho(1, 0) = 0.9;
  r.rho(1, 2) = r.rho(2, 1) = 0.9;
  r.rho(0, 2) = r.rho(2, 0) = -0.2;
  const auto g = build_graph(r, 0.5);
  CHECK(g.edges().size() == 2);
  CHECK(max_degree(g) == 2);
}

TEST_CASE("excluded tasks are isolated") {
  auto r = rho_of(3);
  r.rho(0, 1) = r.rho(1, 0) = 0.9;
  r.included[1] = false;
  CHECK(build_graph(r, 0.5).edges().empty());
}

TEST_CASE("welsh-powell examples") {
  CHECK(welsh_powell(graph_of(3, {{0, 1}, {1, 2}, {0, 2}})).colors() == 3);
  const auto path = welsh_powell(graph_of(3, {{0, 1}, {1, 2}}));
  CHECK(path.colors() == 2);
  CHECK(path.classes[0] == std::vector<std::size_t>{1});
  CHECK(path.classes[1] == std::vector<std::size_t>{0, 2});
  const auto empty = welsh_powell(ConflictGraph(5));
  CHECK(empty.colors() == 1);
  CHECK(empty.classes[0].size() == 5);
}

TEST_CASE("max degree examples") {
  CHECK(max_degree(ConflictGraph(4)) == 0);
  CHECK(max_degree(graph_of(3, {{0, 1}, {1, 2}, {0, 2}})) == 2);
  CHECK(max_degree(graph_of(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}})) == 5);
}

TEST_CASE("self loops are rejected") {
  ConflictGraph g(3);
  CHECK_THROWS(g.add_edge(1, 1));
}

TEST_CASE("minimum coverage") {
  SUBCASE("empty graph needs nothing") {
    const auto g = ConflictGraph(4);
    const auto s = enforce_min_coverage(welsh_powell(g), g, 1);
    CHECK(s.extra_slots.empty());
    CHECK(s.coverage_ok());
  }
  SUBCASE("path with f_min 2: every vertex blocked by the centre") {
    // vertex 1's slot holds only the centre, which conflicts with 0 and 2,
    // so neither end can be duplicated and all three fall short
    const auto g = graph_of(3, {{0, 1}, {1, 2}});
    const auto s = enforce_min_coverage(welsh_powell(g), g, 2);
    CHECK(s.extra_slots.empty());
    CHECK(s.coverage_failures == std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("star with two slots flags everything") {
    const auto g = graph_of(4, {{0, 1}, {0, 2}, {0, 3}});
    const auto s = enforce_min_coverage(welsh_powell(g), g, 2);
    CHECK(s.period() == 2);
    CHECK(s.coverage_failures.size() == 4);
  }
  SUBCASE("duplicates into a compatible slot") {
    // 0-1, 1-2, 2-3 ... plus isolated 4 spreads into every slot
    const auto g = graph_of(5, {{0, 1}, {1, 2}, {0, 2}});
    const auto s = enforce_min_coverage(welsh_powell(g), g, 3);
    CHECK(s.period() == 3);
    CHECK(s.appearances[4] == 3);
    for (std::size_t slot = 0; slot < s.period(); ++slot) {
      const auto members = s.slot(slot);
      for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
          CHECK_FALSE(g.has_edge(members[a], members[b]));
    }
  }
}

TEST_CASE("random graphs: proper, at most Delta+1 colours, chi <= m for K <= 8") {
  Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng() % 8;
    const double p = std::uniform_real_distribution<double>(0, 1)(rng);
    ConflictGraph g(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (std::uniform_real_distribution<double>(0, 1)(rng) < p) g.add_edge(i, j);
    const auto c = welsh_powell(g);
    CHECK(is_proper(g, c));
    CHECK(c.colors() <= max_degree(g) + 1);
    CHECK(chromatic_number(g) <= c.colors());
  }
}

TEST_CASE("edge list round trip") {
  const auto g = graph_of(5, {{0, 3}, {1, 4}, {2, 3}});
  std::stringstream ss;
  write_edge_list(ss, g);
  CHECK(read_edge_list(ss) == g);
}
