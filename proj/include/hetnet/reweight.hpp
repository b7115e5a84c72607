#pragma once
// Iteratively reweighted group-sparse power optimization: repeatedly solve the
// weighted problem with BCGA, warm-started from the previous solution, and
// reset w_l = 1 / (||p_l||_2 + tau_l(t)) so BSs with small power are pushed
// harder towards zero.

#include <span>
#include <vector>

#include "hetnet/bcga.hpp"

namespace hetnet {

/// w_l = 1 / (||p_l||_2 + tau_l). `tau` holds one value per BS.
std::vector<double> update_weights(const PowerMatrix& P, std::span<const double> tau);
/// Same with a common tau.
std::vector<double> update_weights(const PowerMatrix& P, double tau);

/// tau_l(t) = max(tau0 * decay^t, floor) * ||pbar_l||_2.
std::vector<double> tau_schedule(const Scenario& s, const SolverConfig& cfg, int t);

/// Starts from w = 1. Stops once the active set is unchanged between two
/// consecutive weighted solves and the weights of active BSs move by less than
/// cfg.weight_tol (relative), or after cfg.max_reweight_iters solves. With
/// lambda = 0 a single solve is returned. Otherwise the iterate with the best
/// full objective is kept and, with cfg.refit, re-solved with its on-set fixed
/// and no group penalty. result.objective_trace is the trace of the solve that
/// produced the returned point; result.outer_iterations counts weighted solves.
SolveResult solve_sparse(const Scenario& s, const SolverConfig& cfg);
SolveResult solve_sparse(const Scenario& s, const SolverConfig& cfg, const Association& X0,
                         const PowerMatrix& P0);

/// Per-solve traces of the last solve_sparse call are returned here when non-null.
SolveResult solve_sparse(const Scenario& s, const SolverConfig& cfg, const Association& X0,
                         const PowerMatrix& P0, std::vector<std::vector<double>>* inner_traces);

}  // namespace hetnet
