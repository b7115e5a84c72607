#pragma once
// Association update: gradient ascent step on X followed by the Euclidean
// projection of each band onto {X >= 0, X 1 <= 1, X' 1 <= 1}. The projection
// is computed from its Lagrangian dual
//   min_{y <= 0, z <= 0}  0.5 ||Theta(y, z)||_F^2 - 1'y - 1'z,
//   Theta(y, z) = max(Xt + y 1' + 1 z', 0),
// with gradient (Theta 1 - 1, Theta' 1 - 1). The dual is piecewise quadratic
// and never strictly convex, so it is minimized by a projected Newton method:
// bound-binding coordinates take a gradient step, free coordinates a step with
// the regularized generalized Hessian, followed by an Armijo search along the
// projection arc. The primal solution is Theta at the dual optimum.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hetnet/scenario.hpp"
#include "hetnet/types.hpp"

namespace hetnet {

struct DualOptions {
  double tol = 1e-8;  // infinity norm of the projected dual gradient, floored at 8 ulp of max abs(xt)
  int max_iters = 5000;
  double initial_step = 1.0;  // gradient step length for bound-binding coordinates
  double armijo_slope = 1e-4;
};

struct DualSolution {
  DualPoint dual;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Elementwise max(xt + y_k + z_l, 0) of a K x L row-major block.
std::vector<double> theta(std::span<const double> xt, std::size_t K, std::size_t L,
                          std::span<const double> y, std::span<const double> z);

/// Dual objective 0.5 ||Theta||^2 - sum(y) - sum(z).
double dual_objective(std::span<const double> xt, std::size_t K, std::size_t L,
                      const DualPoint& d);

/// Projected-gradient residual (infinity norm) of the dual at d.
double dual_residual(std::span<const double> xt, std::size_t K, std::size_t L,
                     const DualPoint& d);

/// Runs the dual solver without throwing; `converged` reports the outcome.
DualSolution solve_dual_unchecked(std::span<const double> xt, std::size_t K, std::size_t L,
                                  const DualOptions& opts, const DualPoint* warm = nullptr);

/// Throws DualNonConvergence carrying the last iterate if the cap is hit.
DualPoint solve_dual(std::span<const double> xt, std::size_t K, std::size_t L, double tol,
                     int max_iters, const DualPoint* warm = nullptr);

/// Theta at d, with rows then columns whose sums exceed one by rounding
/// scaled back onto the constraint.
std::vector<double> recover_primal(std::span<const double> xt, std::size_t K, std::size_t L,
                                   const DualPoint& d);

/// Projects every band of xt. Entries equal to -infinity are pinned to zero.
/// Throws DualNonConvergence tagged with the band index.
Association project_association(const Association& xt, const DualOptions& opts = {});

/// Band-wise projector that warm-starts each band from its previous duals.
class Projector {
 public:
  Projector(std::size_t bands, std::size_t users, std::size_t bs, DualOptions opts = {});

  /// Never throws on non-convergence: the rounded last iterate is used and
  /// counted in nonconverged().
  Association project(const Association& xt);

  const DualOptions& options() const { return opts_; }
  const std::vector<DualPoint>& duals() const { return duals_; }
  long total_dual_iterations() const { return dual_iters_; }
  long nonconverged() const { return nonconverged_; }

 private:
  DualOptions opts_;
  std::size_t K_, L_;
  std::vector<DualPoint> duals_;
  long dual_iters_ = 0;
  long nonconverged_ = 0;
};

struct StepRule {
  double initial = 1.0;
  double shrink = 0.5;
  double slope = 1e-4;
  int max_halvings = 40;
  double null_step = 1e-7;  // max-norm change treated as no movement
};

struct XStep {
  Association X;
  double utility = 0.0;  // sum_k ln R_k at X
  double step = 0.0;     // accepted alpha, 0 when X is unchanged
  bool moved = false;
  bool stalled = false;
};

/// One projected gradient ascent step on the utility with P held fixed,
/// backtracking alpha until the Armijo test passes. `support`, when not
/// empty, has one byte per entry of X; zero bytes pin the entry to zero.
XStep ascent_step_x(const Scenario& s, const Association& X, const PowerMatrix& P,
                    const StepRule& rule, Projector& projector,
                    std::span<const std::uint8_t> support = {});
XStep ascent_step_x(const Scenario& s, const Association& X, const PowerMatrix& P,
                    const StepRule& rule = {});

}  // namespace hetnet
