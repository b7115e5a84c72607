#include "hetnet/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hetnet/errors.hpp"
#include "hetnet/kernels.hpp"

namespace hetnet {

RateTable::RateTable(const Scenario& s, const PowerMatrix& P)
    : users_(s.users()), bs_(s.bs()), r_(s.bands() * s.users() * s.bs()) {
  const auto& kt = kernels::active();
  const double c = s.band_width_hz();
  for (std::size_t n = 0; n < s.bands(); ++n) {
    const double* p = P.band(n).data();
    for (std::size_t k = 0; k < users_; ++k) {
      double* out = r_.data() + (n * users_ + k) * bs_;
      kt.sinr_ratio(bs_, s.user_gains(n, k).data(), p, s.noise_power_w(), out);
      for (std::size_t l = 0; l < bs_; ++l) out[l] = c * std::log2(out[l]);
    }
  }
}

double spectral_rate(const Scenario& s, const PowerMatrix& P, std::size_t k, std::size_t l,
                     std::size_t n) {
  double interference = s.noise_power_w();
  for (std::size_t j = 0; j < s.bs(); ++j) {
    if (j != l) interference += s.gain(k, j, n) * P(n, j);
  }
  return s.band_width_hz() * std::log2(1.0 + s.gain(k, l, n) * P(n, l) / interference);
}

std::vector<double> user_rates(const Association& X, const RateTable& rates) {
  const auto& kt = kernels::active();
  const std::size_t K = X.users(), L = X.bs();
  std::vector<double> R(K, 0.0);
  for (std::size_t n = 0; n < X.bands(); ++n) {
    const double* x = X.band(n).data();
    for (std::size_t k = 0; k < K; ++k) {
      R[k] += kt.dot(L, x + k * L, rates.row(n, k).data());
    }
  }
  return R;
}

double bs_power(std::span<const double> p, double psi) {
  double sum = 0.0;
  bool on = false;
  for (double v : p) {
    sum += v;
    on = on || v != 0.0;
  }
  return sum + (on ? psi : 0.0);
}

double bs_power(std::span<const double> p, double psi, double eps_off) {
  double sum = 0.0, sq = 0.0;
  for (double v : p) {
    sum += v;
    sq += v * v;
  }
  return sum + (std::sqrt(sq) > eps_off ? psi : 0.0);
}

double total_power(const Scenario& s, const PowerMatrix& P, double eps_off) {
  double q = 0.0;
  for (std::size_t l = 0; l < s.bs(); ++l) q += bs_power(P.column(l), s.on_power(l), eps_off);
  return q;
}

double log_utility(std::span<const double> R) {
  double u = 0.0;
  for (std::size_t k = 0; k < R.size(); ++k) {
    if (!(R[k] > 0.0)) throw StarvedUser(k);
    u += std::log(R[k]);
  }
  return u;
}

double smooth_objective(const Scenario& s, const Association& X, const PowerMatrix& P,
                        double lambda) {
  const RateTable rates(s, P);
  double psum = 0.0;
  for (double v : P.data()) psum += v;
  return log_utility(user_rates(X, rates)) - lambda * psum;
}

double full_objective(const Scenario& s, const Association& X, const PowerMatrix& P,
                      double lambda, double eps_off) {
  const RateTable rates(s, P);
  return log_utility(user_rates(X, rates)) - lambda * total_power(s, P, eps_off);
}

Association grad_x(const RateTable& rates, std::span<const double> R, std::size_t bands,
                   std::size_t users, std::size_t bs) {
  Association G(bands, users, bs);
  for (std::size_t k = 0; k < users; ++k) {
    if (!(R[k] > 0.0)) throw StarvedUser(k);
  }
  for (std::size_t n = 0; n < bands; ++n) {
    for (std::size_t k = 0; k < users; ++k) {
      const double inv = 1.0 / R[k];
      const auto r = rates.row(n, k);
      for (std::size_t l = 0; l < bs; ++l) G(n, k, l) = r[l] * inv;
    }
  }
  return G;
}

Association grad_x(const Scenario& s, const Association& X, const PowerMatrix& P) {
  const RateTable rates(s, P);
  const auto R = user_rates(X, rates);
  return grad_x(rates, R, s.bands(), s.users(), s.bs());
}

PowerMatrix grad_p(const Scenario& s, const Association& X, const PowerMatrix& P,
                   std::span<const double> R, double lambda) {
  const auto& kt = kernels::active();
  const std::size_t K = s.users(), L = s.bs();
  const double c = s.band_width_hz() / std::numbers::ln2;
  for (std::size_t k = 0; k < K; ++k) {
    if (!(R[k] > 0.0)) throw StarvedUser(k);
  }
  PowerMatrix G(s.bands(), L);
  for (std::size_t n = 0; n < s.bands(); ++n) {
    double* acc = G.band(n).data();
    const double* p = P.band(n).data();
    const double* x = X.band(n).data();
    for (std::size_t k = 0; k < K; ++k) {
      const double* xk = x + k * L;
      if (std::all_of(xk, xk + L, [](double v) { return v == 0.0; })) continue;
      kt.grad_p_accumulate(L, s.user_gains(n, k).data(), p, xk, s.noise_power_w(), c / R[k], acc);
    }
    for (std::size_t l = 0; l < L; ++l) acc[l] -= lambda;
  }
  return G;
}

PowerMatrix grad_p(const Scenario& s, const Association& X, const PowerMatrix& P, double lambda) {
  const RateTable rates(s, P);
  const auto R = user_rates(X, rates);
  return grad_p(s, X, P, R, lambda);
}

double association_violation(const Association& X) {
  const std::size_t K = X.users(), L = X.bs();
  double worst = 0.0;
  std::vector<double> cols(L);
  for (std::size_t n = 0; n < X.bands(); ++n) {
    std::fill(cols.begin(), cols.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      double row = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        const double v = X(n, k, l);
        worst = std::max(worst, -v);
        row += v;
        cols[l] += v;
      }
      worst = std::max(worst, row - 1.0);
    }
    for (double c : cols) worst = std::max(worst, c - 1.0);
  }
  return worst;
}

double power_violation(const Scenario& s, const PowerMatrix& P) {
  double worst = 0.0;
  for (std::size_t n = 0; n < s.bands(); ++n) {
    for (std::size_t l = 0; l < s.bs(); ++l) {
      worst = std::max({worst, -P(n, l), P(n, l) - s.power_budget(l, n)});
    }
  }
  return worst;
}

}  // namespace hetnet
