#pragma once
// Data-parallel inner loops of the solver. Each kernel has a portable scalar
// reference and an AVX2/FMA variant; the variant is picked once at runtime
// from CPUID and can be overridden with select_isa() or HETNET_OPT_ISA=scalar.
// Elementwise kernels agree bit-for-bit across variants; reductions differ
// only in summation order.

#include <cstddef>
#include <string_view>

namespace hetnet::kernels {

enum class Isa { scalar, avx2 };

// Theta = max(xt + y 1' + 1 z', 0) for a K x L row-major xt.
// Writes row and column sums of Theta, optionally Theta itself (theta may be
// null), and returns 0.5 * ||Theta||_F^2.
using ThetaSumsFn = double (*)(std::size_t K, std::size_t L, const double* xt, const double* y,
                               const double* z, double* theta, double* row_sums,
                               double* col_sums);

using DotFn = double (*)(std::size_t n, const double* a, const double* b);

// out = x + alpha * g
using AxpyFn = void (*)(std::size_t n, double alpha, const double* x, const double* g,
                        double* out);

// out[l] = T / (T - g[l] p[l]) with T = noise + sum_l g[l] p[l]; returns T.
// log2(out[l]) is the spectral efficiency of the link to BS l.
using SinrRatioFn = double (*)(std::size_t L, const double* g, const double* p, double noise,
                               double* out);

// Power-gradient contribution of one (band, user) pair:
//   acc[j] += coef * g[j] * (sum(x) / T - sum_{l != j} x[l] / I[l])
// where I[l] = T - g[l] p[l] is the interference-plus-noise seen on link l.
using GradPAccumulateFn = void (*)(std::size_t L, const double* g, const double* p,
                                   const double* x, double noise, double coef, double* acc);

struct Table {
  Isa isa;
  ThetaSumsFn theta_sums;
  DotFn dot;
  AxpyFn axpy;
  SinrRatioFn sinr_ratio;
  GradPAccumulateFn grad_p_accumulate;
};

namespace scalar {
double theta_sums(std::size_t K, std::size_t L, const double* xt, const double* y, const double* z,
                  double* theta, double* row_sums, double* col_sums);
double dot(std::size_t n, const double* a, const double* b);
void axpy(std::size_t n, double alpha, const double* x, const double* g, double* out);
double sinr_ratio(std::size_t L, const double* g, const double* p, double noise, double* out);
void grad_p_accumulate(std::size_t L, const double* g, const double* p, const double* x,
                       double noise, double coef, double* acc);
}  // namespace scalar

namespace avx2 {
// Only callable when isa_supported(Isa::avx2).
double theta_sums(std::size_t K, std::size_t L, const double* xt, const double* y, const double* z,
                  double* theta, double* row_sums, double* col_sums);
double dot(std::size_t n, const double* a, const double* b);
void axpy(std::size_t n, double alpha, const double* x, const double* g, double* out);
double sinr_ratio(std::size_t L, const double* g, const double* p, double noise, double* out);
void grad_p_accumulate(std::size_t L, const double* g, const double* p, const double* x,
                       double noise, double coef, double* acc);
}  // namespace avx2

bool isa_supported(Isa isa);
const Table& table(Isa isa);

/// The table in use by the solver.
const Table& active();
Isa active_isa();
/// Switches the process-wide variant. Throws InvalidArgument if unsupported.
void select_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace hetnet::kernels
