#include <algorithm>
#include <cmath>
#include <limits>

#include <doctest.h>

#include "hetnet/baselines.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/reweight.hpp"
#include "test_util.hpp"

using namespace hetnet;

namespace {

// Two users, each next to its own BS, weak cross gains, unit budgets and on-powers.
Scenario two_cells() {
  return Scenario(2, 2, 1, 1.0, 0.1, {1.0, 0.1, 0.1, 1.0}, {1.0, 1.0}, {1.0, 1.0},
                  {BsKind::pico, BsKind::pico});
}

// Best full objective over all non-empty on-sets, each solved with the set fixed.
std::pair<double, std::size_t> enumerate_best(const Scenario& s, double lambda) {
  SolverConfig cfg;
  cfg.lambda = lambda;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t on = 0;
  for (const OffSet& off : {OffSet{}, OffSet{0}, OffSet{1}}) {
    const SolveResult r = solve_restricted(s, cfg, off);
    if (r.full_objective > best) {
      best = r.full_objective;
      on = r.active_bs.size();
    }
  }
  return {best, on};
}

}  // namespace

TEST_CASE("weight update examples") {
  PowerMatrix P(2, 3);
  P(0, 0) = 3.0;
  P(1, 0) = 4.0;
  P(0, 2) = 1.0;
  const auto w = update_weights(P, 1.0);
  CHECK(w[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(w[1] == 1.0);
  CHECK(w[2] == doctest::Approx(0.5).epsilon(1e-15));

  const auto wz = update_weights(PowerMatrix(2, 3), std::vector<double>{1e-6, 0.5, 2.0});
  CHECK(wz[0] == doctest::Approx(1e6));
  CHECK(wz[1] == 2.0);
  CHECK(wz[2] == 0.5);
  for (double v : wz) CHECK(v > 0.0);

  CHECK_THROWS_AS(update_weights(P, 0.0), InvalidArgument);
  CHECK_THROWS_AS(update_weights(P, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("tau schedule decays to its floor relative to each budget") {
  const Scenario s = test::random_scenario(2, 3, 4, 5);
  SolverConfig cfg;
  cfg.tau0 = 1.0;
  cfg.tau_decay = 0.5;
  cfg.tau_floor = 1e-2;
  for (std::size_t l = 0; l < 3; ++l) {
    double nrm = 0.0;
    for (std::size_t n = 0; n < 4; ++n) nrm += s.power_budget(l, n) * s.power_budget(l, n);
    nrm = std::sqrt(nrm);
    CHECK(tau_schedule(s, cfg, 0)[l] == doctest::Approx(nrm).epsilon(1e-14));
    CHECK(tau_schedule(s, cfg, 3)[l] == doctest::Approx(0.125 * nrm).epsilon(1e-14));
    CHECK(tau_schedule(s, cfg, 40)[l] == doctest::Approx(1e-2 * nrm).epsilon(1e-14));
  }
}

TEST_CASE("without a price a single weighted solve is returned") {
  const Scenario s = test::random_scenario(5, 3, 2, 13, 1e6);
  SolverConfig cfg;
  std::vector<std::vector<double>> traces;
  const auto [X0, P0] = default_init(s);
  const SolveResult r = solve_sparse(s, cfg, X0, P0, &traces);
  CHECK(r.outer_iterations == 1);
  CHECK(traces.size() == 1);
  const SolveResult plain = solve_weighted(s, cfg, X0, P0);
  CHECK(r.objective == plain.objective);
  CHECK(r.X == plain.X);
  CHECK(r.P == plain.P);
}

TEST_CASE("the on-set matches enumeration on two cells") {
  const Scenario s = two_cells();
  for (double lambda : {0.1, 5.0}) {
    SolverConfig cfg;
    cfg.lambda = lambda;
    const SolveResult r = solve_sparse(s, cfg);
    const auto [best, on] = enumerate_best(s, lambda);
    CAPTURE(lambda);
    CHECK(r.active_bs.size() == on);
    CHECK(r.full_objective >= best - 1e-6 * std::max(1.0, std::abs(best)));
  }
  SolverConfig cfg;
  cfg.lambda = 5.0;
  CHECK(solve_sparse(s, cfg).active_bs.size() == 1);
}

TEST_CASE("reweighted solves stay feasible and honour the cap") {
  const Scenario s = test::random_scenario(6, 5, 3, 71, 1e6);
  for (double lambda : {0.01, 0.3, 3.0}) {
    SolverConfig cfg;
    cfg.lambda = lambda;
    cfg.max_reweight_iters = 6;
    std::vector<std::vector<double>> traces;
    const auto [X0, P0] = default_init(s);
    const SolveResult r = solve_sparse(s, cfg, X0, P0, &traces);
    CAPTURE(lambda);
    CHECK(r.outer_iterations >= 1);
    CHECK(r.outer_iterations <= 6);
    CHECK(association_violation(r.X) <= kEpsFeas);
    CHECK(power_violation(s, r.P) == 0.0);
    CHECK(r.full_objective == doctest::Approx(full_objective(s, r.X, r.P, lambda)).epsilon(1e-12));
    for (const auto& tr : traces) {
      for (std::size_t i = 1; i < tr.size(); ++i) REQUIRE(tr[i] >= tr[i - 1] - 1e-9);
    }
    for (std::size_t l = 0; l < s.bs(); ++l) {
      const bool active = std::find(r.active_bs.begin(), r.active_bs.end(), l) != r.active_bs.end();
      if (!active) {
        for (std::size_t n = 0; n < s.bands(); ++n) REQUIRE(r.P(n, l) == 0.0);
      }
    }
  }
}

TEST_CASE("higher prices never switch more BSs on") {
  const Scenario s = test::random_scenario(6, 5, 2, 90, 1e6);
  std::size_t prev = s.bs();
  for (double lambda : {0.0, 0.1, 1.0, 10.0}) {
    SolverConfig cfg;
    cfg.lambda = lambda;
    const SolveResult r = solve_sparse(s, cfg);
    CAPTURE(lambda);
    CHECK(r.active_bs.size() <= prev);
    CHECK(!r.active_bs.empty());
    prev = r.active_bs.size();
  }
}
