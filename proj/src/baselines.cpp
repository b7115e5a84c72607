#include "hetnet/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "hetnet/errors.hpp"
#include "hetnet/objective.hpp"

namespace hetnet {

namespace {

SolverConfig smooth_config(const SolverConfig& cfg, std::size_t L) {
  SolverConfig c = cfg;
  c.weights.assign(L, 0.0);
  return c;
}

}  // namespace

SolveResult solve_restricted(const Scenario& s, const SolverConfig& cfg, const OffSet& off,
                             const std::pair<Association, PowerMatrix>* warm) {
  const std::size_t L = s.bs();
  for (std::size_t l : off) {
    if (l >= L) throw InvalidArgument("off-set index out of range");
  }
  BlockConstraints bc;
  bc.pinned_off.assign(L, false);
  for (std::size_t l : off) bc.pinned_off[l] = true;
  const auto start = warm ? pinned_start(s, bc.pinned_off, &warm->first, &warm->second)
                          : pinned_start(s, bc.pinned_off);
  return solve_weighted(s, smooth_config(cfg, L), start.first, start.second, bc);
}

std::vector<std::size_t> macro_then_pico_order(const Scenario& s) {
  std::vector<std::size_t> order;
  for (std::size_t l = 0; l < s.bs(); ++l) {
    if (s.kind(l) == BsKind::macro) order.push_back(l);
  }
  for (std::size_t l = 0; l < s.bs(); ++l) {
    if (s.kind(l) == BsKind::pico) order.push_back(l);
  }
  return order;
}

GreedyResult greedy_turnoff(const Scenario& s, const SolverConfig& cfg, const GreedyOptions& opts) {
  const std::vector<std::size_t> order = opts.order.empty() ? macro_then_pico_order(s) : opts.order;
  for (std::size_t l : order) {
    if (l >= s.bs()) throw InvalidArgument("test order index out of range");
  }

  GreedyResult g;
  g.result = solve_restricted(s, cfg, g.off);
  g.accepted_objectives.push_back(g.result.full_objective);
  int total_rounds = g.result.iterations;

  for (int pass = 0; pass < opts.passes; ++pass) {
    for (std::size_t l : order) {
      if (g.off.contains(l) || g.off.size() + 1 >= s.bs()) continue;
      OffSet trial = g.off;
      trial.insert(l);
      ++g.tests;
      const std::pair<Association, PowerMatrix> warm{g.result.X, g.result.P};
      SolveResult cand = solve_restricted(s, cfg, trial, &warm);
      total_rounds += cand.iterations;
      spdlog::debug("greedy: test BS {} -> {:.9g} (current {:.9g})", l, cand.full_objective,
                    g.result.full_objective);
      if (cand.full_objective > g.result.full_objective) {
        g.off = std::move(trial);
        g.result = std::move(cand);
        g.accepted_objectives.push_back(g.result.full_objective);
      }
    }
  }
  g.result.iterations = total_rounds;
  g.result.outer_iterations = g.tests;
  return g;
}

Association equal_share(const Scenario& s, const std::vector<std::size_t>& assignment) {
  const std::size_t N = s.bands(), K = s.users(), L = s.bs();
  if (assignment.size() != N * K) throw InvalidArgument("assignment must have N*K entries");
  Association X(N, K, L);
  std::vector<std::size_t> count(L);
  for (std::size_t n = 0; n < N; ++n) {
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t k = 0; k < K; ++k) ++count[assignment[n * K + k]];
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t l = assignment[n * K + k];
      X(n, k, l) = 1.0 / static_cast<double>(count[l]);
    }
  }
  return X;
}

Association max_sinr_association(const Scenario& s, const PowerMatrix& P) {
  const std::size_t N = s.bands(), K = s.users(), L = s.bs();
  std::vector<std::size_t> assignment(N * K);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      double total = s.noise_power_w();
      for (std::size_t l = 0; l < L; ++l) total += s.gain(k, l, n) * P(n, l);
      std::size_t best = 0;
      double best_sinr = -1.0;
      for (std::size_t l = 0; l < L; ++l) {
        const double signal = s.gain(k, l, n) * P(n, l);
        const double sinr = signal / (total - signal);
        if (sinr > best_sinr) {
          best_sinr = sinr;
          best = l;
        }
      }
      assignment[n * K + k] = best;
    }
  }
  return equal_share(s, assignment);
}

Association load_balanced_association(const Scenario& s, const PowerMatrix& P,
                                      const SolverConfig& cfg) {
  const std::size_t N = s.bands(), K = s.users(), L = s.bs();
  Association X = default_init(s).first;
  Projector projector(N, K, L, cfg.dual);
  StepRule rule{cfg.alpha0, cfg.armijo_shrink, cfg.armijo_slope, cfg.max_halvings};
  double f = log_utility(user_rates(X, RateTable(s, P)));
  for (int it = 0; it < cfg.max_outer_iters; ++it) {
    XStep step = ascent_step_x(s, X, P, rule, projector);
    if (!step.moved) break;
    X = std::move(step.X);
    const bool done = std::abs(step.utility - f) <= cfg.tol * std::max(1.0, std::abs(f));
    f = step.utility;
    if (done) break;
  }

  std::vector<std::size_t> assignment(N * K);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      std::size_t best = 0;
      for (std::size_t l = 1; l < L; ++l) {
        if (X(n, k, l) > X(n, k, best)) best = l;
      }
      assignment[n * K + k] = best;
    }
  }
  return equal_share(s, assignment);
}

SolveResult optimize_after_association(const Scenario& s, const Association& X,
                                       const PowerMatrix& P, const SolverConfig& cfg) {
  BlockConstraints bc;
  bc.support.resize(X.data().size());
  for (std::size_t i = 0; i < bc.support.size(); ++i) bc.support[i] = X.data()[i] > 0.0 ? 1 : 0;
  return solve_weighted(s, smooth_config(cfg, s.bs()), X, P, bc);
}

SolveResult solve_max_sinr(const Scenario& s, const SolverConfig& cfg) {
  const PowerMatrix& P0 = s.power_budget();
  return optimize_after_association(s, max_sinr_association(s, P0), P0, cfg);
}

SolveResult solve_load_balanced(const Scenario& s, const SolverConfig& cfg) {
  const PowerMatrix& P0 = s.power_budget();
  return optimize_after_association(s, load_balanced_association(s, P0, cfg), P0, cfg);
}

}  // namespace hetnet
