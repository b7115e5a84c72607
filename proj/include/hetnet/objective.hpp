#pragma once
// Rates, utility, power consumption and the gradients of the smooth objective
//   f(X, P) = sum_k ln R_k - lambda * sum_{l,n} p_l^n
// with R_k = sum_{l,n} x_kl^n r_kl^n. Link rates use log base 2 (bit/s); the
// utility uses the natural log. Changing either base only rescales lambda.

#include <cstddef>
#include <span>
#include <vector>

#include "hetnet/scenario.hpp"
#include "hetnet/types.hpp"

namespace hetnet {

/// A BS whose power vector has 2-norm at or below this is treated as off.
inline constexpr double kEpsOff = 1e-8;
/// Slack allowed on the association row/column constraints.
inline constexpr double kEpsFeas = 1e-9;

/// Link rates r[n][k][l] in bit/s for a fixed power matrix. Same layout as Association.
class RateTable {
 public:
  RateTable() = default;
  RateTable(const Scenario& s, const PowerMatrix& P);

  double operator()(std::size_t n, std::size_t k, std::size_t l) const {
    return r_[(n * users_ + k) * bs_ + l];
  }
  std::span<const double> band(std::size_t n) const {
    return {r_.data() + n * users_ * bs_, users_ * bs_};
  }
  std::span<const double> row(std::size_t n, std::size_t k) const {
    return {r_.data() + (n * users_ + k) * bs_, bs_};
  }
  std::span<const double> data() const { return r_; }

 private:
  std::size_t users_ = 0, bs_ = 0;
  std::vector<double> r_;
};

/// Rate of user k on BS l in band n, evaluated directly from the SINR.
double spectral_rate(const Scenario& s, const PowerMatrix& P, std::size_t k, std::size_t l,
                     std::size_t n);

/// R_k = sum over bands and BSs of x * r.
std::vector<double> user_rates(const Association& X, const RateTable& rates);

/// sum_n p^n + psi * ||p||_0, with the exact zero-norm.
double bs_power(std::span<const double> p, double psi);
/// Same, but the BS counts as off when ||p||_2 <= eps_off.
double bs_power(std::span<const double> p, double psi, double eps_off);

/// sum_l Q_l(p_l) with the eps_off rule.
double total_power(const Scenario& s, const PowerMatrix& P, double eps_off = kEpsOff);

/// sum_k ln R_k. Throws StarvedUser for the first k with R_k <= 0.
double log_utility(std::span<const double> R);

double smooth_objective(const Scenario& s, const Association& X, const PowerMatrix& P,
                        double lambda);
double full_objective(const Scenario& s, const Association& X, const PowerMatrix& P,
                      double lambda, double eps_off = kEpsOff);

/// df/dx = r / R_k.
Association grad_x(const Scenario& s, const Association& X, const PowerMatrix& P);
Association grad_x(const RateTable& rates, std::span<const double> R, std::size_t bands,
                   std::size_t users, std::size_t bs);

/// df/dp, N x L; includes the -lambda term.
PowerMatrix grad_p(const Scenario& s, const Association& X, const PowerMatrix& P, double lambda);
PowerMatrix grad_p(const Scenario& s, const Association& X, const PowerMatrix& P,
                   std::span<const double> R, double lambda);

/// Largest violation of x >= 0, row sums <= 1 and column sums <= 1 over all bands.
double association_violation(const Association& X);
/// Largest violation of 0 <= p <= pbar.
double power_violation(const Scenario& s, const PowerMatrix& P);

}  // namespace hetnet
