#include "hetnet/reweight.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include <spdlog/spdlog.h>

#include "hetnet/errors.hpp"

namespace hetnet {

namespace {

double column_norm(const PowerMatrix& P, std::size_t l) {
  double sq = 0.0;
  for (std::size_t n = 0; n < P.bands(); ++n) sq += P(n, l) * P(n, l);
  return std::sqrt(sq);
}

}  // namespace

std::vector<double> update_weights(const PowerMatrix& P, std::span<const double> tau) {
  if (tau.size() != P.bs()) throw InvalidArgument("tau must have one entry per BS");
  std::vector<double> w(P.bs());
  for (std::size_t l = 0; l < P.bs(); ++l) {
    if (!(tau[l] > 0.0)) throw InvalidArgument("tau must be positive");
    w[l] = 1.0 / (column_norm(P, l) + tau[l]);
  }
  return w;
}

std::vector<double> update_weights(const PowerMatrix& P, double tau) {
  return update_weights(P, std::vector<double>(P.bs(), tau));
}

std::vector<double> tau_schedule(const Scenario& s, const SolverConfig& cfg, int t) {
  const double rel = std::max(cfg.tau0 * std::pow(cfg.tau_decay, t), cfg.tau_floor);
  std::vector<double> tau(s.bs());
  for (std::size_t l = 0; l < s.bs(); ++l) tau[l] = rel * column_norm(s.power_budget(), l);
  return tau;
}

SolveResult solve_sparse(const Scenario& s, const SolverConfig& cfg, const Association& X0,
                         const PowerMatrix& P0, std::vector<std::vector<double>>* inner_traces) {
  cfg.validate();
  const std::size_t L = s.bs();
  SolverConfig inner = cfg;
  inner.weights.assign(L, 1.0);

  if (inner_traces) inner_traces->clear();
  Association X = X0;
  PowerMatrix P = P0;
  std::vector<std::size_t> prev_active;
  BlockConstraints bc;
  bc.pinned_off.assign(L, false);
  std::set<std::vector<bool>> rejected;
  int iterations = 0;
  long dual_iterations = 0;
  SolveResult res;
  // The weighted solves may switch BSs back on and lose ground on the full
  // objective; the best iterate seen is the one returned.
  std::optional<SolveResult> best;

  for (int t = 0; t < cfg.max_reweight_iters; ++t) {
    try {
      res = solve_weighted(s, inner, X, P, bc);
    } catch (const Infeasible& e) {
      throw Infeasible("reweighting step " + std::to_string(t) + ": " + e.what());
    } catch (const StarvedUser& e) {
      throw Infeasible("reweighting step " + std::to_string(t) + ": " + e.what());
    }
    iterations += res.iterations;
    dual_iterations += res.dual_iterations;
    if (inner_traces) inner_traces->push_back(res.objective_trace);
    if (cfg.lambda == 0.0) {
      res.outer_iterations = 1;
      break;
    }

    // BSs left at a sliver of their budget are tested for switch-off together.
    // If that loses on the full objective, the lower-power half of the group
    // is tried, and so on down to a single BS.
    std::vector<std::pair<double, std::size_t>> low;
    for (std::size_t l : res.active_bs) {
      const double rel = column_norm(res.P, l) / column_norm(s.power_budget(), l);
      if (rel <= cfg.drop_rel) low.emplace_back(rel, l);
    }
    std::sort(low.begin(), low.end());
    // When every active BS is low, the relatively strongest one stays on.
    if (!low.empty() && low.size() == res.active_bs.size()) low.pop_back();
    for (std::size_t m = low.size(); m > 0; m /= 2) {
      std::vector<bool> mask(L, false);
      for (std::size_t i = 0; i < m; ++i) mask[low[i].second] = true;
      if (rejected.contains(mask)) continue;
      BlockConstraints trial_bc = bc;
      for (std::size_t l = 0; l < L; ++l) trial_bc.pinned_off[l] = bc.pinned_off[l] || mask[l];
      const auto [X1, P1] = pinned_start(s, trial_bc.pinned_off, &res.X, &res.P);
      SolveResult trial = solve_weighted(s, inner, X1, P1, trial_bc);
      iterations += trial.iterations;
      dual_iterations += trial.dual_iterations;
      spdlog::debug("reweight t={}: pinning {} low-power BSs off -> {:.9g} (was {:.9g})", t, m,
                    trial.full_objective, res.full_objective);
      if (trial.full_objective > res.full_objective) {
        bc = std::move(trial_bc);
        res = std::move(trial);
        if (inner_traces) inner_traces->push_back(res.objective_trace);
        break;
      }
      rejected.insert(std::move(mask));
    }
    res.outer_iterations = t + 1;
    X = res.X;
    P = res.P;
    // BSs a weighted solve leaves switched off stay off.
    for (std::size_t l = 0; l < L; ++l) {
      if (!std::binary_search(res.active_bs.begin(), res.active_bs.end(), l)) bc.pinned_off[l] = true;
    }
    if (!best || res.full_objective > best->full_objective) best = res;

    const auto w_next = update_weights(P, tau_schedule(s, cfg, t));
    double max_rel = 0.0;
    std::size_t arg = 0;
    for (std::size_t l : res.active_bs) {
      const double rel = std::abs(w_next[l] - inner.weights[l]) / inner.weights[l];
      if (rel > max_rel) {
        max_rel = rel;
        arg = l;
      }
    }
    spdlog::debug("reweight t={}: {} active BSs, full objective {:.9g}, max weight change {:.3g} (BS {}, norm {:.4g})",
                  t, res.active_bs.size(), res.full_objective, max_rel, arg, column_norm(P, arg));
    const bool same_set = t > 0 && res.active_bs == prev_active;
    if (same_set && max_rel < cfg.weight_tol) break;
    prev_active = res.active_bs;
    inner.weights = w_next;
  }

  // Candidates: the last iterate and, if better on the full objective, the
  // best earlier one. With refit on, each is re-solved on its own on-set
  // before they are compared.
  const int outer = res.outer_iterations;
  std::vector<SolveResult> candidates;
  std::vector<bool> refitted;
  candidates.push_back(std::move(res));
  if (best && best->full_objective > candidates.front().full_objective &&
      best->active_bs != candidates.front().active_bs) {
    candidates.push_back(std::move(*best));
  } else if (best && best->full_objective > candidates.front().full_objective) {
    candidates.front() = std::move(*best);
  }
  refitted.assign(candidates.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    SolveResult& c = candidates[i];
    if (cfg.lambda == 0.0 || !cfg.refit) continue;
    SolverConfig fin = cfg;
    fin.weights.assign(L, 0.0);
    BlockConstraints on_set;
    on_set.pinned_off.assign(L, true);
    for (std::size_t l : c.active_bs) on_set.pinned_off[l] = false;
    SolveResult refit = solve_weighted(s, fin, c.X, c.P, on_set);
    iterations += refit.iterations;
    dual_iterations += refit.dual_iterations;
    spdlog::debug("reweight: refit on {} BSs -> {:.9g} (was {:.9g})", c.active_bs.size(), refit.full_objective,
                  c.full_objective);
    if (refit.full_objective >= c.full_objective) {
      c = std::move(refit);
      refitted[i] = true;
    }
  }
  std::size_t pick = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].full_objective > candidates[pick].full_objective) pick = i;
  }
  res = std::move(candidates[pick]);
  res.outer_iterations = outer;
  if (inner_traces && refitted[pick]) inner_traces->push_back(res.objective_trace);
  res.iterations = iterations;
  res.dual_iterations = dual_iterations;
  return res;
}

SolveResult solve_sparse(const Scenario& s, const SolverConfig& cfg, const Association& X0,
                         const PowerMatrix& P0) {
  return solve_sparse(s, cfg, X0, P0, nullptr);
}

SolveResult solve_sparse(const Scenario& s, const SolverConfig& cfg) {
  const auto [X0, P0] = default_init(s);
  return solve_sparse(s, cfg, X0, P0, nullptr);
}

}  // namespace hetnet
