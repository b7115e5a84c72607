#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hetnet/assoc_proj.hpp"
#include "hetnet/scenario.hpp"
#include "hetnet/types.hpp"

namespace hetnet {

/// max(1 - t / ||pt||_2, 0) * pt. Returns exact zeros when t >= ||pt||_2 or pt == 0.
std::vector<double> block_soft_threshold(std::span<const double> pt, double t);

/// lambda * psi * w * beta.
double prox_threshold(double lambda, double psi, double w, double beta);

/// Elementwise max(min(phat, pbar), 0).
std::vector<double> clamp_power(std::span<const double> phat, std::span<const double> pbar);

/// f(X, P) - lambda * sum_l psi_l w_l ||p_l||_2. Empty weights mean no group term.
double weighted_objective(const Scenario& s, const Association& X, const PowerMatrix& P,
                          double lambda, std::span<const double> weights);

struct PStep {
  PowerMatrix P;
  double objective = 0.0;  // weighted objective at P
  double step = 0.0;       // accepted beta
  bool moved = false;
  bool stalled = false;
};

/// One proximal gradient step on every BS column from a frozen P:
///   pt = p + beta * grad,  phat = block_soft_threshold(pt, lambda psi w beta),
///   p+ = clamp_power(phat, pbar),
/// with beta halved until the weighted objective increases sufficiently.
/// Columns flagged in `pinned_off` stay at zero. Columns whose linearized
/// model would decrease under the step keep their current power for that trial.
/// `step_scale`, when given, multiplies beta per BS (beta_l = beta * step_scale[l]).
PStep ascent_step_p(const Scenario& s, const Association& X, const PowerMatrix& P, double lambda,
                    std::span<const double> weights, const StepRule& rule,
                    const std::vector<bool>& pinned_off = {},
                    std::span<const double> step_scale = {});

}  // namespace hetnet
