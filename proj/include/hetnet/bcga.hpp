#pragma once
// Block-coordinate gradient ascent on the weighted problem
//   max f(X, P) - lambda * sum_l psi_l w_l ||p_l||_2   s.t. box and association constraints,
// alternating a projected gradient step in X and a proximal gradient step in P.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "hetnet/assoc_proj.hpp"
#include "hetnet/objective.hpp"
#include "hetnet/scenario.hpp"
#include "hetnet/types.hpp"

namespace hetnet {

struct SolverConfig {
  double lambda = 0.0;
  std::vector<double> weights;  // group weights w_l; empty means all ones

  double alpha0 = 1.0;
  double beta0 = 0.5;
  double armijo_shrink = 0.5;
  double armijo_slope = 1e-4;
  int max_halvings = 40;
  // Per-BS P steps beta_l = beta * (||pbar_l|| / max_j ||pbar_j||)^2.
  bool budget_scaled_steps = true;

  double tol = 1e-6;  // relative objective change over one X+P round
  int max_outer_iters = 500;
  DualOptions dual;
  double eps_off = kEpsOff;

  // Reweighting schedule: tau_l(t) = max(tau0 * tau_decay^t, tau_floor) * ||pbar_l||_2.
  double tau0 = 1.0;
  double tau_decay = 0.5;
  double tau_floor = 1e-6;
  int max_reweight_iters = 15;
  double weight_tol = 1e-3;
  // After each weighted solve, active BSs with ||p_l|| <= drop_rel * ||pbar_l||
  // are pinned off together if that raises the full objective. 0 disables.
  double drop_rel = 1e-2;
  // Re-solve once with the final on-set fixed and zero group weights.
  bool refit = true;

  std::uint64_t rng_seed = 0;  // carried into result metadata

  void validate() const;
};

/// Restrictions used by the baselines. Empty vectors mean "no restriction".
struct BlockConstraints {
  std::vector<bool> pinned_off;       // length L; pinned columns stay exactly zero
  std::vector<std::uint8_t> support;  // length N*K*L; zero entries of X stay zero
};

enum class SolveStatus { converged, max_iters, stalled };
std::string_view status_name(SolveStatus s);

struct SolveResult {
  Association X;
  PowerMatrix P;
  std::vector<double> objective_trace;  // weighted objective after every accepted block step
  std::vector<double> rates;            // R_k, bit/s
  std::vector<std::size_t> active_bs;   // ||p_l||_2 > eps_off
  int iterations = 0;                   // BCGA rounds (summed over reweighting steps)
  int accepted_updates = 0;
  int outer_iterations = 0;  // reweighting steps, or greedy tests
  long dual_iterations = 0;
  SolveStatus status = SolveStatus::converged;

  double objective = 0.0;       // weighted objective at (X, P)
  double full_objective = 0.0;  // sum ln R - lambda * sum_l Q_l
  double utility = 0.0;         // sum ln R
  double total_power_w = 0.0;   // sum_l Q_l
};

/// ||pbar_l||^2 / max_j ||pbar_j||^2.
std::vector<double> budget_step_scale(const Scenario& s);

/// P at the budget, x = min(1/L, 1/K) everywhere.
std::pair<Association, PowerMatrix> default_init(const Scenario& s);

/// Start for a solve with the columns in `off` pinned to zero. Without a warm
/// start: x = min(1/L_on, 1/K) on on-BSs and P at the budget. With one, the
/// pinned columns are zeroed and every user left with under 1e-3 of its
/// previous rate gets a share of its strongest remaining BS in each band. If a
/// user still starves, X is averaged with the default start, and after that P
/// is reset to the budget.
std::pair<Association, PowerMatrix> pinned_start(const Scenario& s, const std::vector<bool>& off,
                                                 const Association* X = nullptr,
                                                 const PowerMatrix* P = nullptr);

/// Runs BCGA from (X0, P0). Throws Infeasible if the start violates the
/// constraints or starves a user.
SolveResult solve_weighted(const Scenario& s, const SolverConfig& cfg, const Association& X0,
                           const PowerMatrix& P0, const BlockConstraints& constraints = {});

/// Zeroes columns with ||p_l||_2 <= eps_off and refreshes rates, active set,
/// utility, power and both objectives.
void finalize(const Scenario& s, const SolverConfig& cfg, SolveResult& r,
              std::span<const double> weights);

}  // namespace hetnet
