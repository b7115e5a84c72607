#include "hetnet/kernels.hpp"

#include <algorithm>

namespace hetnet::kernels::scalar {

double theta_sums(std::size_t K, std::size_t L, const double* xt, const double* y, const double* z,
                  double* theta, double* row_sums, double* col_sums) {
  std::fill(col_sums, col_sums + L, 0.0);
  double sq = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double* row = xt + k * L;
    double rs = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double v = std::max(row[l] + y[k] + z[l], 0.0);
      if (theta) theta[k * L + l] = v;
      rs += v;
      col_sums[l] += v;
      sq += v * v;
    }
    row_sums[k] = rs;
  }
  return 0.5 * sq;
}

double dot(std::size_t n, const double* a, const double* b) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(std::size_t n, double alpha, const double* x, const double* g, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + alpha * g[i];
}

double sinr_ratio(std::size_t L, const double* g, const double* p, double noise, double* out) {
  const double total = noise + dot(L, g, p);
  for (std::size_t l = 0; l < L; ++l) out[l] = total / (total - g[l] * p[l]);
  return total;
}

void grad_p_accumulate(std::size_t L, const double* g, const double* p, const double* x,
                       double noise, double coef, double* acc) {
  const double total = noise + dot(L, g, p);
  double xsum = 0.0, xi_sum = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    xsum += x[l];
    xi_sum += x[l] / (total - g[l] * p[l]);
  }
  const double base = xsum / total - xi_sum;
  for (std::size_t j = 0; j < L; ++j) {
    acc[j] += coef * g[j] * (base + x[j] / (total - g[j] * p[j]));
  }
}

}  // namespace hetnet::kernels::scalar
