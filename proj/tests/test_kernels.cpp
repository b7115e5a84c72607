#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "hetnet/kernels.hpp"

using namespace hetnet::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& g, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(g);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(isa_supported(Isa::scalar));
  CHECK(table(Isa::scalar).isa == Isa::scalar);
  CHECK(isa_name(Isa::scalar) == "scalar");
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!isa_supported(Isa::avx2)) {
    MESSAGE("AVX2 not available on this machine; equivalence not exercised");
    return;
  }
  std::mt19937_64 g(7);
  for (std::size_t K : {1u, 3u, 8u, 63u}) {
    for (std::size_t L : {1u, 2u, 4u, 5u, 7u, 28u}) {
      CAPTURE(K);
      CAPTURE(L);
      const auto xt = random_vec(g, K * L, -1.0, 2.0);
      const auto y = random_vec(g, K, -1.0, 0.0);
      const auto z = random_vec(g, L, -1.0, 0.0);
      std::vector<double> th_s(K * L), th_v(K * L), rs_s(K), rs_v(K), cs_s(L), cs_v(L);
      const double hs = scalar::theta_sums(K, L, xt.data(), y.data(), z.data(), th_s.data(), rs_s.data(), cs_s.data());
      const double hv = avx2::theta_sums(K, L, xt.data(), y.data(), z.data(), th_v.data(), rs_v.data(), cs_v.data());
      CHECK(bit_equal(th_s, th_v));
      CHECK(bit_equal(cs_s, cs_v));
      CHECK(hv == doctest::Approx(hs).epsilon(1e-13));
      for (std::size_t k = 0; k < K; ++k) CHECK(rs_v[k] == doctest::Approx(rs_s[k]).epsilon(1e-13));

      // Null theta pointer gives the same sums.
      std::vector<double> rs_n(K), cs_n(L);
      const double hn = avx2::theta_sums(K, L, xt.data(), y.data(), z.data(), nullptr, rs_n.data(), cs_n.data());
      CHECK(hn == hv);
      CHECK(bit_equal(rs_n, rs_v));
    }
  }

  for (std::size_t n : {0u, 1u, 3u, 4u, 9u, 64u, 1001u}) {
    CAPTURE(n);
    const auto a = random_vec(g, n, -3.0, 3.0);
    const auto b = random_vec(g, n, -3.0, 3.0);
    const double ds = scalar::dot(n, a.data(), b.data());
    const double dv = avx2::dot(n, a.data(), b.data());
    CHECK(std::abs(ds - dv) <= 1e-13 * (1.0 + std::abs(ds)) * static_cast<double>(n + 1));

    std::vector<double> os(n), ov(n);
    scalar::axpy(n, 0.37, a.data(), b.data(), os.data());
    avx2::axpy(n, 0.37, a.data(), b.data(), ov.data());
    CHECK(bit_equal(os, ov));
  }

  for (std::size_t L : {1u, 2u, 4u, 6u, 13u, 28u}) {
    CAPTURE(L);
    const auto gains = random_vec(g, L, 1e-14, 1e-9);
    const auto p = random_vec(g, L, 0.0, 1.25);
    const auto x = random_vec(g, L, 0.0, 0.5);
    std::vector<double> os(L), ov(L);
    const double ts = scalar::sinr_ratio(L, gains.data(), p.data(), 7.87e-15, os.data());
    const double tv = avx2::sinr_ratio(L, gains.data(), p.data(), 7.87e-15, ov.data());
    CHECK(ts == doctest::Approx(tv).epsilon(1e-14));
    for (std::size_t l = 0; l < L; ++l) CHECK(ov[l] == doctest::Approx(os[l]).epsilon(1e-13));

    std::vector<double> as(L, 0.5), av(L, 0.5);
    scalar::grad_p_accumulate(L, gains.data(), p.data(), x.data(), 7.87e-15, 3.0e-7, as.data());
    avx2::grad_p_accumulate(L, gains.data(), p.data(), x.data(), 7.87e-15, 3.0e-7, av.data());
    for (std::size_t l = 0; l < L; ++l) CHECK(av[l] == doctest::Approx(as[l]).epsilon(1e-12));
  }
}

TEST_CASE("select_isa switches the active table") {
  const Isa before = active_isa();
  select_isa(Isa::scalar);
  CHECK(active().isa == Isa::scalar);
  if (isa_supported(Isa::avx2)) {
    select_isa(Isa::avx2);
    CHECK(active().isa == Isa::avx2);
  }
  select_isa(before);
}
