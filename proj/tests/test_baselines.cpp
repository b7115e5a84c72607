#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "hetnet/baselines.hpp"
#include "hetnet/errors.hpp"
#include "test_util.hpp"

using namespace hetnet;

namespace {

void check_feasible(const Scenario& s, const SolveResult& r) {
  CHECK(association_violation(r.X) <= kEpsFeas);
  CHECK(power_violation(s, r.P) == 0.0);
  for (double v : r.rates) CHECK(v > 0.0);
}

bool single_bs_per_band(const Association& X) {
  for (std::size_t n = 0; n < X.bands(); ++n) {
    for (std::size_t k = 0; k < X.users(); ++k) {
      int served = 0;
      for (std::size_t l = 0; l < X.bs(); ++l) served += X(n, k, l) > 0.0;
      if (served > 1) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("restricted solve with nothing off is the unpenalized solve") {
  const Scenario s = test::random_scenario(5, 4, 2, 61, 1e6);
  SolverConfig cfg;
  cfg.lambda = 0.02;
  const SolveResult r = solve_restricted(s, cfg, {});
  SolverConfig plain = cfg;
  plain.weights.assign(4, 0.0);
  const auto [X0, P0] = default_init(s);
  const SolveResult q = solve_weighted(s, plain, X0, P0);
  CHECK(r.full_objective == doctest::Approx(q.full_objective).epsilon(1e-8));
  CHECK(r.objective_trace.size() == q.objective_trace.size());
}

TEST_CASE("restricted solve pins and rejects") {
  const Scenario s = test::random_scenario(4, 3, 2, 62, 1e6);
  SolverConfig cfg;
  cfg.lambda = 0.01;
  const SolveResult r = solve_restricted(s, cfg, {0, 2});
  CHECK(r.active_bs == std::vector<std::size_t>{1});
  for (std::size_t n = 0; n < 2; ++n) {
    CHECK(r.P(n, 0) == 0.0);
    CHECK(r.P(n, 2) == 0.0);
  }
  check_feasible(s, r);
  CHECK_THROWS_AS(solve_restricted(s, cfg, {0, 1, 2}), Infeasible);
  CHECK_THROWS_AS(solve_restricted(s, cfg, {5}), InvalidArgument);
}

TEST_CASE("greedy never switches off the last BS") {
  const Scenario one(3, 1, 2, 1.0, 0.1, std::vector<double>(6, 1.0), {1.0, 1.0}, {100.0}, {BsKind::macro});
  SolverConfig cfg;
  cfg.lambda = 10.0;
  const GreedyResult g = greedy_turnoff(one, cfg);
  CHECK(g.off.empty());
  CHECK(g.tests == 0);
  CHECK(g.result.active_bs == std::vector<std::size_t>{0});
}

TEST_CASE("greedy accepts only strict improvements in the given order") {
  const Scenario s = test::random_scenario(6, 5, 2, 63, 1e6);
  SolverConfig cfg;
  cfg.lambda = 0.5;
  const GreedyResult g = greedy_turnoff(s, cfg);
  for (std::size_t i = 1; i < g.accepted_objectives.size(); ++i) {
    CHECK(g.accepted_objectives[i] > g.accepted_objectives[i - 1]);
  }
  CHECK(g.accepted_objectives.size() == g.off.size() + 1);
  CHECK(g.result.full_objective == g.accepted_objectives.back());
  CHECK(g.off.size() < s.bs());
  check_feasible(s, g.result);
  for (std::size_t l : g.off) {
    for (std::size_t n = 0; n < 2; ++n) CHECK(g.result.P(n, l) == 0.0);
  }

  GreedyOptions only;
  only.order = {3};
  only.passes = 3;
  const GreedyResult h = greedy_turnoff(s, cfg, only);
  CHECK(h.tests <= 3);
  CHECK(h.tests >= 1);
  CHECK((h.off.empty() || h.off == OffSet{3}));

  GreedyOptions reversed;
  reversed.order = macro_then_pico_order(s);
  std::reverse(reversed.order.begin(), reversed.order.end());
  const GreedyResult rv = greedy_turnoff(s, cfg, reversed);
  for (std::size_t i = 1; i < rv.accepted_objectives.size(); ++i) {
    CHECK(rv.accepted_objectives[i] > rv.accepted_objectives[i - 1]);
  }
  GreedyOptions bad;
  bad.order = {9};
  CHECK_THROWS_AS(greedy_turnoff(s, cfg, bad), InvalidArgument);
}

TEST_CASE("macro then pico order") {
  const Scenario s(1, 4, 1, 1.0, 0.1, std::vector<double>(4, 1.0), std::vector<double>(4, 1.0),
                   {1.0, 10.0, 1.0, 10.0}, {BsKind::pico, BsKind::macro, BsKind::pico, BsKind::macro});
  CHECK(macro_then_pico_order(s) == std::vector<std::size_t>{1, 3, 0, 2});
}

TEST_CASE("max-SINR association") {
  const Scenario single = test::random_scenario(4, 1, 2, 64);
  const Association X1 = max_sinr_association(single, single.power_budget());
  for (double v : X1.data()) CHECK(v == 0.25);

  // User 0 sits next to BS 1, users 1 and 2 next to BS 0.
  const Scenario nf(3, 2, 1, 1.0, 0.1, {0.01, 1.0, 1.0, 0.01, 0.5, 0.02}, {1.0, 1.0}, {1.0, 1.0},
                    {BsKind::macro, BsKind::pico});
  const Association X = max_sinr_association(nf, nf.power_budget());
  CHECK(X(0, 0, 1) == 1.0);
  CHECK(X(0, 1, 0) == 0.5);
  CHECK(X(0, 2, 0) == 0.5);
  CHECK(single_bs_per_band(X));

  // Equal gains: ties go to the lowest index.
  const Scenario tie(2, 2, 1, 1.0, 0.1, std::vector<double>(4, 1.0), {1.0, 1.0}, {1.0, 1.0},
                     {BsKind::macro, BsKind::pico});
  const Association T = max_sinr_association(tie, tie.power_budget());
  CHECK(T(0, 0, 0) == 0.5);
  CHECK(T(0, 1, 0) == 0.5);
}

TEST_CASE("load-balanced association on a symmetric pair") {
  const Scenario s(2, 2, 2, 1.0, 0.1, {1.0, 0.1, 0.1, 1.0, 1.0, 0.1, 0.1, 1.0}, std::vector<double>(4, 1.0),
                   {1.0, 1.0}, {BsKind::pico, BsKind::pico});
  const Association X = load_balanced_association(s, s.power_budget());
  for (std::size_t n = 0; n < 2; ++n) {
    CHECK(X(n, 0, 0) == 1.0);
    CHECK(X(n, 1, 1) == 1.0);
  }
  CHECK(single_bs_per_band(X));
}

TEST_CASE("equal share") {
  const Scenario s = test::random_scenario(3, 2, 2, 65);
  const Association X = equal_share(s, {0, 0, 1, 1, 1, 1});
  CHECK(X(0, 0, 0) == 0.5);
  CHECK(X(0, 2, 1) == 1.0);
  CHECK(X(1, 0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(association_violation(X) == 0.0);
  CHECK_THROWS_AS(equal_share(s, {0, 1}), InvalidArgument);
}

TEST_CASE("refinement after association keeps the support") {
  const Scenario s(1, 2, 2, 1.0, 0.1, {1.0, 0.5, 1.0, 0.5}, std::vector<double>(4, 1.0), {1.0, 1.0},
                   {BsKind::macro, BsKind::pico});
  const Association X0 = max_sinr_association(s, s.power_budget());
  const SolveResult r = optimize_after_association(s, X0, s.power_budget(), SolverConfig{});
  for (std::size_t n = 0; n < 2; ++n) {
    CHECK(r.X(n, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.X(n, 0, 1) == 0.0);
    CHECK(r.P(n, 0) == 1.0);
    CHECK(r.P(n, 1) == 0.0);
  }
  check_feasible(s, r);
}

TEST_CASE("baseline outputs are feasible") {
  const Scenario s = test::random_scenario(7, 4, 3, 66, 1e6);
  SolverConfig cfg;
  cfg.lambda = 0.05;
  for (const SolveResult& r : {solve_max_sinr(s, cfg), solve_load_balanced(s, cfg), greedy_turnoff(s, cfg).result}) {
    check_feasible(s, r);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i) REQUIRE(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-9);
  }
  CHECK(single_bs_per_band(solve_max_sinr(s, cfg).X));
  CHECK(single_bs_per_band(solve_load_balanced(s, cfg).X));
}
