#pragma once
// Benchmarks: greedy BS deactivation on the smooth problem with pinned-off
// BSs, and two single-BS association rules (max-SINR and a load-balancing
// proxy) whose allocation and power are then refined by BCGA on the fixed
// support.

#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "hetnet/bcga.hpp"

namespace hetnet {

using OffSet = std::set<std::size_t>;

/// BCGA on f with p_l = 0 pinned for l in `off` and no group penalty.
/// Throws Infeasible when no BS is left to cover some user. `warm`, when
/// given, is used as the start after zeroing the pinned columns.
SolveResult solve_restricted(const Scenario& s, const SolverConfig& cfg, const OffSet& off,
                             const std::pair<Association, PowerMatrix>* warm = nullptr);

/// Macros in index order, then picos in index order.
std::vector<std::size_t> macro_then_pico_order(const Scenario& s);

struct GreedyOptions {
  std::vector<std::size_t> order;  // empty: macro_then_pico_order
  int passes = 2;
};

struct GreedyResult {
  SolveResult result;
  OffSet off;
  std::vector<double> accepted_objectives;  // full objective after start and each accepted turn-off
  int tests = 0;
};

/// Sequentially tries to switch off each on-BS in `order`, keeping the change
/// only if the full objective strictly increases. BSs are never re-activated.
GreedyResult greedy_turnoff(const Scenario& s, const SolverConfig& cfg, const GreedyOptions& opts = {});

/// Each user, in each band, is given to its highest-SINR BS (lowest index on
/// ties); every BS splits the band's time equally among its users.
Association max_sinr_association(const Scenario& s, const PowerMatrix& P);

/// Proxy for load-aware single-BS association: maximize the utility over X
/// for fixed P, keep the largest share of each user in each band, then split
/// each BS's time equally among its users.
Association load_balanced_association(const Scenario& s, const PowerMatrix& P,
                                      const SolverConfig& cfg = {});

/// Equal time split per (band, BS) over the users assigned by `assignment`
/// (one BS index per band and user, layout n*K + k).
Association equal_share(const Scenario& s, const std::vector<std::size_t>& assignment);

/// BCGA from (X, P) with X restricted to X's support, P unrestricted, no group penalty.
SolveResult optimize_after_association(const Scenario& s, const Association& X,
                                       const PowerMatrix& P, const SolverConfig& cfg);

SolveResult solve_max_sinr(const Scenario& s, const SolverConfig& cfg);
SolveResult solve_load_balanced(const Scenario& s, const SolverConfig& cfg);

}  // namespace hetnet
