#include "hetnet/assoc_proj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "hetnet/errors.hpp"
#include "hetnet/kernels.hpp"
#include "hetnet/objective.hpp"

namespace hetnet {

namespace {

// Packs y then z into one vector so the dual iteration works on a single array.
struct DualState {
  std::vector<double> v;       // [y (K); z (L)]
  std::vector<double> grad;    // same layout
  double value = 0.0;
};

void evaluate(std::span<const double> xt, std::size_t K, std::size_t L, DualState& st) {
  const auto& kt = kernels::active();
  st.grad.resize(K + L);
  const double half_sq = kt.theta_sums(K, L, xt.data(), st.v.data(), st.v.data() + K, nullptr,
                                       st.grad.data(), st.grad.data() + K);
  double vsum = 0.0;
  for (std::size_t i = 0; i < K + L; ++i) {
    vsum += st.v[i];
    st.grad[i] -= 1.0;
  }
  st.value = half_sq - vsum;
}

double residual_of(const DualState& st) {
  double r = 0.0;
  for (std::size_t i = 0; i < st.v.size(); ++i) {
    r = std::max(r, std::abs(st.v[i] - std::min(st.v[i] - st.grad[i], 0.0)));
  }
  return r;
}

// A dual coordinate whose row (or column) of Theta has no positive entry sees
// a linear dual with slope -1 until the next kink, so it jumps straight there
// (or to 0). Rows go first, columns see the updated rows. Returns true if
// anything moved.
bool jump_flat(std::span<const double> xt, std::size_t K, std::size_t L, DualState& st) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double* y = st.v.data();
  double* z = st.v.data() + K;
  bool moved = false;
  for (std::size_t k = 0; k < K; ++k) {
    if (y[k] >= 0.0) continue;
    double kink = inf;
    for (std::size_t l = 0; l < L; ++l) kink = std::min(kink, -(xt[k * L + l] + z[l]));
    if (!(kink > y[k])) continue;
    y[k] = std::min(kink, 0.0);
    moved = true;
  }
  for (std::size_t l = 0; l < L; ++l) {
    if (z[l] >= 0.0) continue;
    double kink = inf;
    for (std::size_t k = 0; k < K; ++k) kink = std::min(kink, -(xt[k * L + l] + y[k]));
    if (!(kink > z[l])) continue;
    z[l] = std::min(kink, 0.0);
    moved = true;
  }
  return moved;
}

DualPoint unpack(const DualState& st, std::size_t K) {
  return {{st.v.begin(), st.v.begin() + static_cast<std::ptrdiff_t>(K)},
          {st.v.begin() + static_cast<std::ptrdiff_t>(K), st.v.end()}};
}

void check_dims(std::span<const double> xt, std::size_t K, std::size_t L, const DualPoint& d) {
  if (xt.size() != K * L || d.y.size() != K || d.z.size() != L) {
    throw InvalidArgument("dual dimensions do not match the K x L block");
  }
}

}  // namespace

std::vector<double> theta(std::span<const double> xt, std::size_t K, std::size_t L,
                          std::span<const double> y, std::span<const double> z) {
  if (xt.size() != K * L || y.size() != K || z.size() != L) {
    throw InvalidArgument("theta: dimension mismatch");
  }
  std::vector<double> out(K * L), rows(K), cols(L);
  kernels::active().theta_sums(K, L, xt.data(), y.data(), z.data(), out.data(), rows.data(),
                               cols.data());
  return out;
}

double dual_objective(std::span<const double> xt, std::size_t K, std::size_t L,
                      const DualPoint& d) {
  check_dims(xt, K, L, d);
  DualState st;
  st.v = d.y;
  st.v.insert(st.v.end(), d.z.begin(), d.z.end());
  evaluate(xt, K, L, st);
  return st.value;
}

double dual_residual(std::span<const double> xt, std::size_t K, std::size_t L,
                     const DualPoint& d) {
  check_dims(xt, K, L, d);
  DualState st;
  st.v = d.y;
  st.v.insert(st.v.end(), d.z.begin(), d.z.end());
  evaluate(xt, K, L, st);
  return residual_of(st);
}

DualSolution solve_dual_unchecked(std::span<const double> xt, std::size_t K, std::size_t L,
                                  const DualOptions& opts, const DualPoint* warm) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("dual tolerance must be positive");
  if (xt.size() != K * L) throw InvalidArgument("dual: xt has wrong size");
  const std::size_t M = K + L;
  // Below a few ulps of the largest entry the residual is rounding noise.
  double scale = 0.0;
  for (double v : xt) {
    if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
  }
  const double tol = std::max(opts.tol, 8.0 * std::numeric_limits<double>::epsilon() * scale);

  DualState cur;
  cur.v.assign(M, 0.0);
  if (warm && warm->y.size() == K && warm->z.size() == L) {
    for (std::size_t k = 0; k < K; ++k) cur.v[k] = std::min(warm->y[k], 0.0);
    for (std::size_t l = 0; l < L; ++l) cur.v[K + l] = std::min(warm->z[l], 0.0);
  }
  evaluate(xt, K, L, cur);

  DualSolution out;
  out.residual = residual_of(cur);
  DualState trial;
  trial.v.resize(M);
  std::vector<double> dir(M);
  std::vector<std::size_t> free_idx;
  std::vector<std::ptrdiff_t> pos(M);
  Eigen::MatrixXd H;
  Eigen::VectorXd rhs;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  double mu_scale = 1.0;

  while (out.residual > tol && out.iterations < opts.max_iters) {
    ++out.iterations;
    if (jump_flat(xt, K, L, cur)) {
      evaluate(xt, K, L, cur);
      out.residual = residual_of(cur);
      if (out.residual <= tol) break;
    }
    // Coordinates at (or within eps of) the bound whose gradient pushes
    // outwards only take a scaled gradient step.
    const double eps = std::min(out.residual, 1e-3);
    free_idx.clear();
    for (std::size_t i = 0; i < M; ++i) {
      const bool binding = cur.v[i] >= -eps && cur.grad[i] < 0.0;
      pos[i] = binding ? -1 : static_cast<std::ptrdiff_t>(free_idx.size());
      if (!binding) free_idx.push_back(i);
      if (binding) dir[i] = -opts.initial_step * cur.grad[i];
    }

    const auto F = static_cast<std::ptrdiff_t>(free_idx.size());
    if (F > 0) {
      // Generalized Hessian: row/column counts of the positive part of Theta
      // on the diagonal and its support pattern off the diagonal.
      H.setZero(F, F);
      const double* y = cur.v.data();
      const double* z = cur.v.data() + K;
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < L; ++l) {
          if (!(xt[k * L + l] + y[k] + z[l] > 0.0)) continue;
          const auto a = pos[k], b = pos[K + l];
          if (a >= 0) H(a, a) += 1.0;
          if (b >= 0) H(b, b) += 1.0;
          if (a >= 0 && b >= 0) {
            H(a, b) += 1.0;
            H(b, a) += 1.0;
          }
        }
      }
      // H always has a null direction (y + c, z - c); regularize with the
      // residual, scaled down while full steps keep being accepted so that
      // long linear stretches of the dual are crossed in a few steps.
      const double mu = std::max(mu_scale * std::min(out.residual, 1.0), 1e-14);
      H.diagonal().array() += mu;
      rhs.resize(F);
      for (std::ptrdiff_t j = 0; j < F; ++j) rhs(j) = -cur.grad[free_idx[static_cast<std::size_t>(j)]];
      ldlt.compute(H);
      const Eigen::VectorXd d = ldlt.solve(rhs);
      for (std::ptrdiff_t j = 0; j < F; ++j) dir[free_idx[static_cast<std::size_t>(j)]] = d(j);
    }

    bool accepted = false;
    double alpha = 1.0;
    int halvings = 0;
    for (; halvings < 60; ++halvings) {
      double model = 0.0;
      for (std::size_t i = 0; i < M; ++i) {
        trial.v[i] = std::min(cur.v[i] + alpha * dir[i], 0.0);
        model += (pos[i] >= 0) ? -alpha * cur.grad[i] * dir[i] : cur.grad[i] * (cur.v[i] - trial.v[i]);
      }
      evaluate(xt, K, L, trial);
      // Near the optimum the decrease drops below the rounding of the dual
      // value, so a halved residual also counts as progress.
      if (cur.value - trial.value >= opts.armijo_slope * model ||
          residual_of(trial) <= 0.5 * out.residual) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted && mu_scale < 1.0) {
      mu_scale = 1.0;
      continue;
    }
    if (!accepted) break;  // no representable decrease left
    mu_scale = halvings == 0 ? std::max(mu_scale * 1e-3, 1e-12) : std::min(mu_scale * 10.0, 1.0);
    std::swap(cur, trial);
    out.residual = residual_of(cur);
  }

  out.converged = out.residual <= tol;
  out.dual = unpack(cur, K);
  return out;
}

DualPoint solve_dual(std::span<const double> xt, std::size_t K, std::size_t L, double tol,
                     int max_iters, const DualPoint* warm) {
  DualOptions opts;
  opts.tol = tol;
  opts.max_iters = max_iters;
  DualSolution sol = solve_dual_unchecked(xt, K, L, opts, warm);
  if (!sol.converged) throw DualNonConvergence(std::move(sol.dual), sol.residual);
  return std::move(sol.dual);
}

std::vector<double> recover_primal(std::span<const double> xt, std::size_t K, std::size_t L,
                                   const DualPoint& d) {
  check_dims(xt, K, L, d);
  std::vector<double> x(K * L), rows(K), cols(L);
  const auto& kt = kernels::active();
  kt.theta_sums(K, L, xt.data(), d.y.data(), d.z.data(), x.data(), rows.data(), cols.data());
  bool rescaled = false;
  for (std::size_t k = 0; k < K; ++k) {
    if (rows[k] > 1.0) {
      const double f = 1.0 / rows[k];
      for (std::size_t l = 0; l < L; ++l) x[k * L + l] *= f;
      rescaled = true;
    }
  }
  if (rescaled) {
    std::fill(cols.begin(), cols.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t l = 0; l < L; ++l) cols[l] += x[k * L + l];
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    if (cols[l] > 1.0) {
      const double f = 1.0 / cols[l];
      for (std::size_t k = 0; k < K; ++k) x[k * L + l] *= f;
    }
  }
  return x;
}

Association project_association(const Association& xt, const DualOptions& opts) {
  const std::size_t K = xt.users(), L = xt.bs();
  Association out(xt.bands(), K, L);
  for (std::size_t n = 0; n < xt.bands(); ++n) {
    DualSolution sol = solve_dual_unchecked(xt.band(n), K, L, opts);
    if (!sol.converged) {
      throw DualNonConvergence(std::move(sol.dual), sol.residual, static_cast<int>(n));
    }
    const auto x = recover_primal(xt.band(n), K, L, sol.dual);
    std::copy(x.begin(), x.end(), out.band(n).begin());
  }
  return out;
}

Projector::Projector(std::size_t bands, std::size_t users, std::size_t bs, DualOptions opts)
    : opts_(opts), K_(users), L_(bs), duals_(bands, DualPoint{std::vector<double>(users, 0.0),
                                                                std::vector<double>(bs, 0.0)}) {}

Association Projector::project(const Association& xt) {
  if (xt.bands() != duals_.size() || xt.users() != K_ || xt.bs() != L_) {
    throw InvalidArgument("projector dimensions do not match");
  }
  Association out(xt.bands(), K_, L_);
  for (std::size_t n = 0; n < xt.bands(); ++n) {
    DualSolution sol = solve_dual_unchecked(xt.band(n), K_, L_, opts_, &duals_[n]);
    dual_iters_ += sol.iterations;
    if (!sol.converged) ++nonconverged_;
    duals_[n] = std::move(sol.dual);
    const auto x = recover_primal(xt.band(n), K_, L_, duals_[n]);
    std::copy(x.begin(), x.end(), out.band(n).begin());
  }
  return out;
}

XStep ascent_step_x(const Scenario& s, const Association& X, const PowerMatrix& P,
                    const StepRule& rule, Projector& projector,
                    std::span<const std::uint8_t> support) {
  const std::size_t N = s.bands(), K = s.users(), L = s.bs();
  if (!support.empty() && support.size() != N * K * L) {
    throw InvalidArgument("support mask has wrong size");
  }
  const RateTable rates(s, P);
  const auto R = user_rates(X, rates);
  const double f0 = log_utility(R);
  const Association G = grad_x(rates, R, N, K, L);
  const auto& kt = kernels::active();
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f0));

  XStep out{X, f0, 0.0, false, false};
  Association xt(N, K, L);
  double alpha = rule.initial;
  for (int h = 0; h <= rule.max_halvings; ++h, alpha *= rule.shrink) {
    kt.axpy(X.data().size(), alpha, X.data().data(), G.data().data(), xt.data().data());
    if (!support.empty()) {
      auto d = xt.data();
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!support[i]) d[i] = -std::numeric_limits<double>::infinity();
      }
    }
    Association cand = projector.project(xt);

    double change = 0.0, model = 0.0;
    for (std::size_t i = 0; i < cand.data().size(); ++i) {
      const double dx = cand.data()[i] - X.data()[i];
      change = std::max(change, std::abs(dx));
      model += G.data()[i] * dx;
    }
    if (change <= rule.null_step) return out;  // stationary to projection accuracy

    const auto Rc = user_rates(cand, rates);
    if (std::any_of(Rc.begin(), Rc.end(), [](double r) { return !(r > 0.0); })) continue;
    const double fc = log_utility(Rc);
    if (fc >= f0 + rule.slope * model - slack) {
      out.X = std::move(cand);
      out.utility = fc;
      out.step = alpha;
      out.moved = true;
      return out;
    }
  }
  out.stalled = true;
  return out;
}

XStep ascent_step_x(const Scenario& s, const Association& X, const PowerMatrix& P,
                    const StepRule& rule) {
  Projector projector(s.bands(), s.users(), s.bs());
  return ascent_step_x(s, X, P, rule, projector);
}

}  // namespace hetnet
