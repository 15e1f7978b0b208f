#include <doctest.h>

#include <set>
#include <sstream>

#include "songoku/planted.hpp"
#include "songoku/run_record.hpp"
#include "songoku/scheduler.hpp"

using namespace songoku;

namespace {

SchedulerConfig base_cfg() {
  SchedulerConfig c;
  c.tau_star = 0.5;
  c.refresh_period = 8;
  c.total_steps = 96;
  c.seed = 3;
  return c;
}

PlantedTaskSuite quiet_suite(double sigma = 0.1) {
  PlantedSpec s;
  s.sigma = sigma;
  s.seed = 11;
  return make_planted_suite(s);
}

SchedulerState state_with_classes(std::vector<std::vector<std::size_t>> classes) {
  SchedulerConfig c = base_cfg();
  std::size_t k = 0;
  for (const auto& cl : classes) k += cl.size();
  SchedulerState st(c, k, 2, 0);
  st.schedule.base_classes = std::move(classes);
  st.schedule.appearances.assign(k, 1);
  return st;
}

}  // namespace

TEST_CASE("anneal examples") {
  SchedulerConfig c = base_cfg();
  c.warmup = 100;
  c.anneal.horizon = 40;
  CHECK(anneal_tau(0, c) == 1.0);
  CHECK(anneal_tau(99, c) == 1.0);
  CHECK(anneal_tau(100, c) == 1.0);
  CHECK(anneal_tau(140, c) == 0.5);
  CHECK(anneal_tau(500, c) == 0.5);
  // the log curve at the horizon midpoint: 1 - 0.5 ln(5.5) / ln(10)
  CHECK(anneal_tau(120, c) == doctest::Approx(0.62980).epsilon(1e-4));
  double prev = 1.0;
  for (std::size_t t = 100; t < 200; ++t) {
    CHECK(anneal_tau(t, c) <= prev);
    prev = anneal_tau(t, c);
  }
}

TEST_CASE("active set cycles through classes") {
  auto st = state_with_classes({{0}, {1, 2}, {3}});
  st.round_start = 10;
  CHECK(active_set(st, 10) == std::vector<std::size_t>{0});
  CHECK(active_set(st, 15) == std::vector<std::size_t>{3});
  CHECK(active_set(st, 11) == std::vector<std::size_t>{1, 2});
  auto one = state_with_classes({{0, 1, 2}});
  for (std::size_t t = 0; t < 5; ++t) CHECK(active_set(one, t).size() == 3);
}

TEST_CASE("apply update examples") {
  auto st = state_with_classes({{0}, {1}});
  apply_update(st, {}, {}, 0.1);
  CHECK(st.theta == Vector{0, 0});

  std::vector<std::size_t> a1{0};
  std::vector<TaskGradient> g1{{0, {1, 0}, {}}};
  apply_update(st, a1, g1, 0.1);
  CHECK(st.theta[0] == doctest::Approx(-0.1));
  CHECK(st.theta[1] == 0.0);

  auto st2 = state_with_classes({{0, 1}});
  std::vector<std::size_t> a2{0, 1};
  std::vector<TaskGradient> g2{{0, {1, 0}, {}}, {1, {0, 1}, {}}};
  apply_update(st2, a2, g2, 1.0);
  CHECK(st2.theta == Vector{-1, -1});

  std::vector<TaskGradient> missing{{0, {1, 0}, {}}};
  CHECK_THROWS(apply_update(st2, a2, missing, 1.0));
  std::vector<TaskGradient> stray{{0, {1, 0}, {}}, {1, {0, 1}, {}}, {2, {0, 1}, {}}};
  CHECK_THROWS(apply_update(st2, a2, stray, 1.0));
}

TEST_CASE("refresh examples") {
  SchedulerConfig c = base_cfg();
  SUBCASE("identical probes give one class") {
    SchedulerState st(c, 4, 2, 0);
    st.tau = 0.5;
    Matrix p(4, 2);
    for (std::size_t k = 0; k < 4; ++k) p.set_row(k, Vector{1, 2});
    refresh(st, c, p, 0);
    CHECK(st.period() == 1);
  }
  SUBCASE("two antipodal clusters give the clusters") {
    SchedulerState st(c, 4, 2, 0);
    st.tau = 0.5;
    Matrix p(4, 2);
    p.set_row(0, Vector{1, 0.1});
    p.set_row(1, Vector{1, -0.1});
    p.set_row(2, Vector{-1, 0.1});
    p.set_row(3, Vector{-1, -0.1});
    const auto w = refresh(st, c, p, 0);
    CHECK(st.period() == 2);
    CHECK(w.edges.size() == 4);
    std::set<std::vector<std::size_t>> classes(st.schedule.base_classes.begin(),
                                               st.schedule.base_classes.end());
    CHECK(classes.count({0, 1}) == 1);
    CHECK(classes.count({2, 3}) == 1);
  }
  SUBCASE("tau = 1 never has edges") {
    SchedulerState st(c, 3, 2, 0);
    st.tau = 1.0;
    Matrix p(3, 2);
    p.set_row(0, Vector{1, 0});
    p.set_row(1, Vector{-1, 0});
    p.set_row(2, Vector{0, 1});
    refresh(st, c, p, 0);
    CHECK(st.period() == 1);
  }
  SUBCASE("degenerate matrix falls back to all tasks") {
    SchedulerState st(c, 3, 2, 0);
    st.tau = 0.5;
    Matrix p(3, 2);
    p.set_row(0, Vector{1, 0});
    const auto w = refresh(st, c, p, 0);
    CHECK(w.degenerate);
    CHECK(st.period() == 1);
    CHECK(st.schedule.base_classes[0].size() == 3);
  }
}

TEST_CASE("run examples") {
  PlantedOracle oracle(quiet_suite());
  SchedulerConfig c = base_cfg();
  c.total_steps = 0;
  CHECK(run(c, oracle).empty());

  SchedulerConfig u = base_cfg();
  u.tau_star = 1.0;
  u.refresh_period = u.total_steps = 50;
  const auto uni = run(u, oracle);
  for (const auto& s : uni.steps) CHECK(s.active.size() == 8);
}

TEST_CASE("planted clusters are respected after annealing") {
  const auto suite = quiet_suite();
  PlantedOracle oracle(suite);
  SchedulerConfig c = base_cfg();
  c.refresh_period = 32;
  c.total_steps = 640;
  const auto rec = run(c, oracle);
  const std::size_t settled = c.anneal_horizon() + c.refresh_period;
  std::size_t checked = 0;
  for (const auto& s : rec.steps) {
    if (s.t < settled) continue;
    std::set<std::size_t> groups;
    for (std::size_t k : s.active) groups.insert(suite.group_of[k]);
    CHECK(groups.size() == 1);
    ++checked;
  }
  CHECK(checked > 0);
  const auto audit = audit_run(rec, c.warmup);
  CHECK(audit.ok());
}

TEST_CASE("identical seeds give identical records") {
  PlantedSpec s;
  s.seed = 4;
  const auto suite = make_planted_suite(s);
  SchedulerConfig c = base_cfg();
  c.permute_classes = true;
  c.f_min = 2;
  PlantedOracle o1(suite), o2(suite);
  const auto a = run(c, o1);
  const auto b = run(c, o2);
  CHECK(a == b);
  c.seed = 4;
  PlantedOracle o3(suite);
  CHECK_FALSE(run(c, o3) == a);
}

TEST_CASE("randomized selection picks whole base classes") {
  const auto suite = quiet_suite();
  PlantedOracle oracle(suite);
  SchedulerConfig c = base_cfg();
  c.selection = ClassSelection::kRandomScaled;
  c.total_steps = 200;
  const auto rec = run(c, oracle);
  CHECK_FALSE(rec.cyclic);
  for (const auto& s : rec.steps) {
    const auto& w = rec.windows[s.window];
    bool found = false;
    for (auto cl : w.schedule.base_classes) {
      std::sort(cl.begin(), cl.end());
      found = found || cl == s.active;
    }
    CHECK(found);
  }
  CHECK(audit_run(rec, 0).ok());
}

TEST_CASE("config validation") {
  SchedulerConfig c = base_cfg();
  c.tau_star = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base_cfg();
  c.refresh_period = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base_cfg();
  c.warmup = c.total_steps;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base_cfg();
  c.beta = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("run csv and summary") {
  PlantedOracle oracle(quiet_suite());
  const auto rec = run(base_cfg(), oracle);
  std::ostringstream out;
  write_run_csv(out, rec);
  const std::string csv = out.str();
  CHECK(csv.rfind("# songoku run csv v1", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rec.steps.size() + 2));
  CHECK(run_summary_json(rec).find("\"windows\"") != std::string::npos);
  CHECK(active_mask_hex({0, 3}, 8) == "09");
}

TEST_CASE("audit catches a co-scheduled edge") {
  PlantedOracle oracle(quiet_suite());
  auto rec = run(base_cfg(), oracle);
  auto& w = rec.windows.back();
  REQUIRE_FALSE(w.edges.empty());
  const auto [i, j] = w.edges.front();
  for (auto& s : rec.steps)
    if (s.window == w.round) {
      s.active = {i, j};
      break;
    }
  CHECK(audit_run(rec, 0).coscheduled_edges == 1);
}
