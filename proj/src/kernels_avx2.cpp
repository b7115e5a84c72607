#include "hetnet/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define HETNET_X86 1
#include <immintrin.h>
#else
#define HETNET_X86 0
#endif

#include <cstdlib>

namespace hetnet::kernels::avx2 {

#if HETNET_X86

#define HETNET_AVX2 __attribute__((target("avx2,fma")))

namespace {

HETNET_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

HETNET_AVX2 double theta_sums(std::size_t K, std::size_t L, const double* xt, const double* y,
                              const double* z, double* theta, double* row_sums,
                              double* col_sums) {
  const std::size_t vec_end = L & ~std::size_t{3};
  for (std::size_t l = 0; l < L; ++l) col_sums[l] = 0.0;
  const __m256d zero = _mm256_setzero_pd();
  __m256d sq = _mm256_setzero_pd();
  double sq_tail = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double* row = xt + k * L;
    const __m256d yk = _mm256_set1_pd(y[k]);
    __m256d rs = _mm256_setzero_pd();
    std::size_t l = 0;
    for (; l < vec_end; l += 4) {
      __m256d v = _mm256_add_pd(_mm256_add_pd(_mm256_loadu_pd(row + l), yk), _mm256_loadu_pd(z + l));
      v = _mm256_max_pd(v, zero);
      if (theta) _mm256_storeu_pd(theta + k * L + l, v);
      rs = _mm256_add_pd(rs, v);
      _mm256_storeu_pd(col_sums + l, _mm256_add_pd(_mm256_loadu_pd(col_sums + l), v));
      sq = _mm256_fmadd_pd(v, v, sq);
    }
    double rs_tail = 0.0;
    for (; l < L; ++l) {
      double v = row[l] + y[k] + z[l];
      v = v > 0.0 ? v : 0.0;
      if (theta) theta[k * L + l] = v;
      rs_tail += v;
      col_sums[l] += v;
      sq_tail += v * v;
    }
    row_sums[k] = hsum(rs) + rs_tail;
  }
  return 0.5 * (hsum(sq) + sq_tail);
}

HETNET_AVX2 double dot(std::size_t n, const double* a, const double* b) {
  const std::size_t vec_end = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i < vec_end; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

HETNET_AVX2 void axpy(std::size_t n, double alpha, const double* x, const double* g, double* out) {
  const std::size_t vec_end = n & ~std::size_t{3};
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i < vec_end; i += 4) {
    const __m256d step = _mm256_mul_pd(a, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), step));
  }
  for (; i < n; ++i) out[i] = x[i] + alpha * g[i];
}

HETNET_AVX2 double sinr_ratio(std::size_t L, const double* g, const double* p, double noise,
                              double* out) {
  const double total = noise + dot(L, g, p);
  const std::size_t vec_end = L & ~std::size_t{3};
  const __m256d t = _mm256_set1_pd(total);
  std::size_t l = 0;
  for (; l < vec_end; l += 4) {
    const __m256d signal = _mm256_mul_pd(_mm256_loadu_pd(g + l), _mm256_loadu_pd(p + l));
    _mm256_storeu_pd(out + l, _mm256_div_pd(t, _mm256_sub_pd(t, signal)));
  }
  for (; l < L; ++l) out[l] = total / (total - g[l] * p[l]);
  return total;
}

HETNET_AVX2 void grad_p_accumulate(std::size_t L, const double* g, const double* p,
                                   const double* x, double noise, double coef, double* acc) {
  const double total = noise + dot(L, g, p);
  const std::size_t vec_end = L & ~std::size_t{3};
  const __m256d t = _mm256_set1_pd(total);

  __m256d xs = _mm256_setzero_pd();
  __m256d xis = _mm256_setzero_pd();
  std::size_t l = 0;
  for (; l < vec_end; l += 4) {
    const __m256d xv = _mm256_loadu_pd(x + l);
    const __m256d signal = _mm256_mul_pd(_mm256_loadu_pd(g + l), _mm256_loadu_pd(p + l));
    xs = _mm256_add_pd(xs, xv);
    xis = _mm256_add_pd(xis, _mm256_div_pd(xv, _mm256_sub_pd(t, signal)));
  }
  double xsum = hsum(xs), xi_sum = hsum(xis);
  for (; l < L; ++l) {
    xsum += x[l];
    xi_sum += x[l] / (total - g[l] * p[l]);
  }

  const double base = xsum / total - xi_sum;
  const __m256d b = _mm256_set1_pd(base);
  const __m256d c = _mm256_set1_pd(coef);
  std::size_t j = 0;
  for (; j < vec_end; j += 4) {
    const __m256d gv = _mm256_loadu_pd(g + j);
    const __m256d signal = _mm256_mul_pd(gv, _mm256_loadu_pd(p + j));
    const __m256d own = _mm256_div_pd(_mm256_loadu_pd(x + j), _mm256_sub_pd(t, signal));
    const __m256d term = _mm256_mul_pd(_mm256_mul_pd(c, gv), _mm256_add_pd(b, own));
    _mm256_storeu_pd(acc + j, _mm256_add_pd(_mm256_loadu_pd(acc + j), term));
  }
  for (; j < L; ++j) acc[j] += coef * g[j] * (base + x[j] / (total - g[j] * p[j]));
}

#else  // !HETNET_X86

double theta_sums(std::size_t, std::size_t, const double*, const double*, const double*, double*,
                  double*, double*) {
  std::abort();
}
double dot(std::size_t, const double*, const double*) { std::abort(); }
void axpy(std::size_t, double, const double*, const double*, double*) { std::abort(); }
double sinr_ratio(std::size_t, const double*, const double*, double, double*) { std::abort(); }
void grad_p_accumulate(std::size_t, const double*, const double*, const double*, double, double,
                       double*) {
  std::abort();
}

#endif

}  // namespace hetnet::kernels::avx2
