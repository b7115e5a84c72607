#include "hetnet/bcga.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "hetnet/errors.hpp"
#include "hetnet/power_prox.hpp"

namespace hetnet {

void SolverConfig::validate() const {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be finite and nonnegative");
  }
  if (!(alpha0 > 0.0) || !(beta0 > 0.0)) throw InvalidArgument("initial steps must be positive");
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) throw InvalidArgument("armijo shrink must lie in (0, 1)");
  if (!(armijo_slope > 0.0 && armijo_slope < 1.0)) throw InvalidArgument("armijo slope must lie in (0, 1)");
  if (!(tol > 0.0) || !(dual.tol > 0.0) || !(eps_off > 0.0) || !(weight_tol > 0.0)) {
    throw InvalidArgument("tolerances must be positive");
  }
  if (max_outer_iters < 1 || dual.max_iters < 1 || max_reweight_iters < 1 || max_halvings < 0) {
    throw InvalidArgument("iteration caps must be positive");
  }
  if (!(tau0 > 0.0) || !(tau_decay > 0.0 && tau_decay <= 1.0) || !(tau_floor > 0.0)) {
    throw InvalidArgument("tau schedule must be positive and nonincreasing");
  }
  if (!(drop_rel >= 0.0 && drop_rel < 1.0)) throw InvalidArgument("drop_rel must lie in [0, 1)");
}

std::string_view status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::stalled: return "stalled";
  }
  return "unknown";
}

std::vector<double> budget_step_scale(const Scenario& s) {
  std::vector<double> sc(s.bs());
  for (std::size_t l = 0; l < s.bs(); ++l) {
    for (std::size_t n = 0; n < s.bands(); ++n) sc[l] += s.power_budget(l, n) * s.power_budget(l, n);
  }
  const double top = *std::max_element(sc.begin(), sc.end());
  for (double& v : sc) v /= top;
  return sc;
}

std::pair<Association, PowerMatrix> default_init(const Scenario& s) {
  const double share = std::min(1.0 / static_cast<double>(s.bs()), 1.0 / static_cast<double>(s.users()));
  return {Association(s.bands(), s.users(), s.bs(), share), s.power_budget()};
}

std::pair<Association, PowerMatrix> pinned_start(const Scenario& s, const std::vector<bool>& off,
                                                 const Association* X, const PowerMatrix* P) {
  const std::size_t N = s.bands(), K = s.users(), L = s.bs();
  if (off.size() != L) throw InvalidArgument("off mask must have one entry per BS");
  const auto on = static_cast<std::size_t>(std::count(off.begin(), off.end(), false));
  if (on == 0) throw Infeasible("user 0 cannot be covered: every BS is off");
  const double share = std::min(1.0 / static_cast<double>(on), 1.0 / static_cast<double>(K));
  Association X0(N, K, L);
  PowerMatrix P0 = s.power_budget();
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t n = 0; n < N; ++n) {
      if (off[l]) P0(n, l) = 0.0;
      for (std::size_t k = 0; k < K; ++k) X0(n, k, l) = off[l] ? 0.0 : share;
    }
  }
  if (!X || !P) return {std::move(X0), std::move(P0)};

  Association Xw = *X;
  PowerMatrix Pw = *P;
  for (std::size_t l = 0; l < L; ++l) {
    if (!off[l]) continue;
    for (std::size_t n = 0; n < N; ++n) {
      Pw(n, l) = 0.0;
      for (std::size_t k = 0; k < K; ++k) Xw(n, k, l) = 0.0;
    }
  }
  const auto starves = [&](const Association& A) {
    const auto R = user_rates(A, RateTable(s, Pw));
    return std::any_of(R.begin(), R.end(), [](double r) { return !(r > 0.0); });
  };
  // Users left with under a thousandth of their previous rate count as starved.
  const auto before = user_rates(*X, RateTable(s, *P));
  const auto R = user_rates(Xw, RateTable(s, Pw));
  std::vector<bool> starved(K);
  bool any = false;
  for (std::size_t k = 0; k < K; ++k) {
    starved[k] = !(R[k] > 0.0) || R[k] < 1e-3 * before[k];
    any = any || starved[k];
  }
  if (!any) return {std::move(Xw), std::move(Pw)};
  // Hand each starved user a share of its strongest remaining BS per band,
  // taken proportionally from that BS's other users.
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      if (!starved[k]) continue;
      std::size_t best = L;
      for (std::size_t l = 0; l < L; ++l) {
        if (off[l] || !(Pw(n, l) > 0.0)) continue;
        if (best == L || s.gain(k, l, n) * Pw(n, l) > s.gain(k, best, n) * Pw(n, best)) best = l;
      }
      if (best == L) continue;
      double row = 0.0;
      std::size_t users = 0;
      for (std::size_t l = 0; l < L; ++l) row += Xw(n, k, l);
      for (std::size_t j = 0; j < K; ++j) users += Xw(n, j, best) > 0.0;
      const double give = std::min(1.0 / static_cast<double>(users + 1), 1.0 - row);
      if (!(give > 0.0)) continue;
      for (std::size_t j = 0; j < K; ++j) Xw(n, j, best) *= 1.0 - give;
      Xw(n, k, best) += give;
    }
  }
  if (!starves(Xw)) return {std::move(Xw), std::move(Pw)};
  // Convex combinations stay feasible and give every user some on-BS share.
  for (std::size_t i = 0; i < Xw.data().size(); ++i) Xw.data()[i] = 0.5 * Xw.data()[i] + 0.5 * X0.data()[i];
  if (!starves(Xw)) return {std::move(Xw), std::move(Pw)};
  return {std::move(Xw), std::move(P0)};
}

void finalize(const Scenario& s, const SolverConfig& cfg, SolveResult& r,
              std::span<const double> weights) {
  const std::size_t L = s.bs();
  r.active_bs.clear();
  for (std::size_t l = 0; l < L; ++l) {
    const auto col = r.P.column(l);
    double sq = 0.0;
    for (double v : col) sq += v * v;
    if (std::sqrt(sq) <= cfg.eps_off) {
      for (std::size_t n = 0; n < s.bands(); ++n) r.P(n, l) = 0.0;
    } else {
      r.active_bs.push_back(l);
    }
  }
  const RateTable rates(s, r.P);
  r.rates = user_rates(r.X, rates);
  r.utility = log_utility(r.rates);
  r.total_power_w = total_power(s, r.P, cfg.eps_off);
  r.full_objective = r.utility - cfg.lambda * r.total_power_w;
  r.objective = weighted_objective(s, r.X, r.P, cfg.lambda, weights);
}

SolveResult solve_weighted(const Scenario& s, const SolverConfig& cfg, const Association& X0,
                           const PowerMatrix& P0, const BlockConstraints& constraints) {
  cfg.validate();
  const std::size_t N = s.bands(), K = s.users(), L = s.bs();
  if (X0.bands() != N || X0.users() != K || X0.bs() != L || P0.bands() != N || P0.bs() != L) {
    throw InvalidArgument("initial point has wrong dimensions");
  }
  std::vector<double> weights = cfg.weights.empty() ? std::vector<double>(L, 1.0) : cfg.weights;
  if (weights.size() != L) throw InvalidArgument("weights must have one entry per BS");

  if (association_violation(X0) > kEpsFeas) throw Infeasible("initial association violates its constraints");
  if (power_violation(s, P0) > 0.0) throw Infeasible("initial power violates its budget");
  const auto& pinned = constraints.pinned_off;
  if (!pinned.empty()) {
    if (pinned.size() != L) throw InvalidArgument("pinned_off must have one entry per BS");
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t n = 0; n < N && pinned[l]; ++n) {
        if (P0(n, l) != 0.0) throw Infeasible("pinned-off BS " + std::to_string(l) + " has power");
      }
    }
  }
  const auto& support = constraints.support;
  if (!support.empty()) {
    if (support.size() != N * K * L) throw InvalidArgument("support mask has wrong size");
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (!support[i] && X0.data()[i] != 0.0) throw Infeasible("initial association leaves its support");
    }
  }

  SolveResult r;
  r.X = X0;
  r.P = P0;
  double F;
  try {
    F = weighted_objective(s, r.X, r.P, cfg.lambda, weights);
  } catch (const StarvedUser& e) {
    throw Infeasible(std::string("initial point: ") + e.what());
  }
  r.objective_trace.push_back(F);

  StepRule xrule{cfg.alpha0, cfg.armijo_shrink, cfg.armijo_slope, cfg.max_halvings};
  StepRule prule{cfg.beta0, cfg.armijo_shrink, cfg.armijo_slope, cfg.max_halvings};
  Projector projector(N, K, L, cfg.dual);
  std::vector<double> step_scale;
  if (cfg.budget_scaled_steps) step_scale = budget_step_scale(s);

  r.status = SolveStatus::max_iters;
  for (int it = 0; it < cfg.max_outer_iters; ++it) {
    ++r.iterations;
    const double F_round = F;

    XStep xs = ascent_step_x(s, r.X, r.P, xrule, projector, support);
    if (xs.moved) {
      r.X = std::move(xs.X);
      F = weighted_objective(s, r.X, r.P, cfg.lambda, weights);
      r.objective_trace.push_back(F);
      ++r.accepted_updates;
    }

    PStep ps = ascent_step_p(s, r.X, r.P, cfg.lambda, weights, prule, pinned, step_scale);
    if (ps.moved) {
      r.P = std::move(ps.P);
      F = ps.objective;
      r.objective_trace.push_back(F);
      ++r.accepted_updates;
    }

    if (xs.stalled && ps.stalled) {
      r.status = SolveStatus::stalled;
      break;
    }
    if (std::abs(F - F_round) <= cfg.tol * std::max(1.0, std::abs(F_round))) {
      r.status = SolveStatus::converged;
      break;
    }
  }
  r.dual_iterations = projector.total_dual_iterations();
  if (projector.nonconverged() > 0) {
    spdlog::debug("bcga: {} band projections hit the dual iteration cap", projector.nonconverged());
  }
  spdlog::debug("bcga: {} rounds, {} accepted steps, status {}, objective {:.9g}", r.iterations,
                r.accepted_updates, status_name(r.status), F);
  finalize(s, cfg, r, weights);
  return r;
}

}  // namespace hetnet
