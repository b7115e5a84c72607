#include "hetnet/power_prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetnet/errors.hpp"
#include "hetnet/objective.hpp"

namespace hetnet {

namespace {

double norm2(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

double group_penalty(const Scenario& s, const PowerMatrix& P, std::span<const double> weights) {
  if (weights.empty()) return 0.0;
  double pen = 0.0;
  for (std::size_t l = 0; l < s.bs(); ++l) {
    if (weights[l] != 0.0) pen += s.on_power(l) * weights[l] * norm2(P.column(l));
  }
  return pen;
}

double power_sum(const PowerMatrix& P) {
  double sum = 0.0;
  for (double v : P.data()) sum += v;
  return sum;
}

}  // namespace

std::vector<double> block_soft_threshold(std::span<const double> pt, double t) {
  if (t < 0.0) throw InvalidArgument("threshold must be nonnegative");
  std::vector<double> out(pt.size(), 0.0);
  const double nrm = norm2(pt);
  if (nrm == 0.0 || t >= nrm) return out;
  const double scale = 1.0 - t / nrm;
  for (std::size_t i = 0; i < pt.size(); ++i) out[i] = scale * pt[i];
  return out;
}

double prox_threshold(double lambda, double psi, double w, double beta) {
  return lambda * psi * w * beta;
}

std::vector<double> clamp_power(std::span<const double> phat, std::span<const double> pbar) {
  if (phat.size() != pbar.size()) throw InvalidArgument("clamp_power: size mismatch");
  std::vector<double> out(phat.size());
  for (std::size_t i = 0; i < phat.size(); ++i) out[i] = std::max(std::min(phat[i], pbar[i]), 0.0);
  return out;
}

double weighted_objective(const Scenario& s, const Association& X, const PowerMatrix& P,
                          double lambda, std::span<const double> weights) {
  return smooth_objective(s, X, P, lambda) - lambda * group_penalty(s, P, weights);
}

PStep ascent_step_p(const Scenario& s, const Association& X, const PowerMatrix& P, double lambda,
                    std::span<const double> weights, const StepRule& rule,
                    const std::vector<bool>& pinned_off, std::span<const double> step_scale) {
  const std::size_t N = s.bands(), L = s.bs();
  if (!weights.empty() && weights.size() != L) throw InvalidArgument("weights must have one entry per BS");
  if (!pinned_off.empty() && pinned_off.size() != L) throw InvalidArgument("pinned_off must have one entry per BS");
  if (!step_scale.empty() && step_scale.size() != L) throw InvalidArgument("step_scale must have one entry per BS");

  const RateTable rates(s, P);
  const auto R = user_rates(X, rates);
  const double F0 = log_utility(R) - lambda * power_sum(P) - lambda * group_penalty(s, P, weights);
  const PowerMatrix G = grad_p(s, X, P, R, lambda);
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(F0));

  std::vector<std::vector<double>> cols(L), grads(L), budgets(L);
  std::vector<double> col_norm(L);
  for (std::size_t l = 0; l < L; ++l) {
    cols[l] = P.column(l);
    grads[l] = G.column(l);
    budgets[l] = s.power_budget().column(l);
    col_norm[l] = norm2(cols[l]);
  }

  PStep out{P, F0, 0.0, false, false};
  double beta = rule.initial;
  std::vector<double> pt(N);
  for (int h = 0; h <= rule.max_halvings; ++h, beta *= rule.shrink) {
    PowerMatrix cand(N, L);
    for (std::size_t l = 0; l < L; ++l) {
      if (!pinned_off.empty() && pinned_off[l]) continue;
      const double w = weights.empty() ? 0.0 : weights[l];
      const double bl = step_scale.empty() ? beta : beta * step_scale[l];
      for (std::size_t n = 0; n < N; ++n) pt[n] = cols[l][n] + bl * grads[l][n];
      const double t = prox_threshold(lambda, s.on_power(l), w, bl);
      const auto next = clamp_power(block_soft_threshold(pt, t), budgets[l]);

      double model = -lambda * s.on_power(l) * w * (norm2(next) - col_norm[l]);
      for (std::size_t n = 0; n < N; ++n) model += grads[l][n] * (next[n] - cols[l][n]);
      cand.set_column(l, model >= 0.0 ? std::span<const double>(next) : std::span<const double>(cols[l]));
    }

    // Squared step length in the metric of the per-BS steps, over beta.
    double change = 0.0, dist_sq = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t l = 0; l < L; ++l) {
        const double d = cand(n, l) - P(n, l);
        change = std::max(change, std::abs(d));
        dist_sq += step_scale.empty() ? d * d : d * d / step_scale[l];
      }
    }
    if (change == 0.0) return out;

    const RateTable cr(s, cand);
    const auto Rc = user_rates(X, cr);
    if (std::any_of(Rc.begin(), Rc.end(), [](double r) { return !(r > 0.0); })) continue;
    const double Fc = log_utility(Rc) - lambda * power_sum(cand) - lambda * group_penalty(s, cand, weights);
    if (Fc >= F0 + rule.slope * dist_sq / beta - slack) {
      out.P = std::move(cand);
      out.objective = Fc;
      out.step = beta;
      out.moved = true;
      return out;
    }
  }
  out.stalled = true;
  return out;
}

}  // namespace hetnet
