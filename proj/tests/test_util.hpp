#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hetnet/scenario.hpp"
#include "hetnet/types.hpp"

namespace hetnet::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("hetnet_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Small scenario with gains around 1, noise 0.1, budgets in [0.5, 2] and
/// on-powers 10 (macro, BS 0) and 1 (picos).
inline Scenario random_scenario(std::size_t K, std::size_t L, std::size_t N, std::uint64_t seed,
                                double bandwidth = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> g(0.05, 2.0), b(0.5, 2.0);
  std::vector<double> gains(N * K * L), budget(N * L), psi(L);
  std::vector<BsKind> kind(L);
  for (double& v : gains) v = g(gen);
  for (double& v : budget) v = b(gen);
  for (std::size_t l = 0; l < L; ++l) {
    kind[l] = l == 0 ? BsKind::macro : BsKind::pico;
    psi[l] = l == 0 ? 10.0 : 1.0;
  }
  return Scenario(K, L, N, bandwidth, 0.1, std::move(gains), std::move(budget), std::move(psi),
                  std::move(kind));
}

/// Feasible association with strictly positive entries.
inline Association random_interior(std::size_t N, std::size_t K, std::size_t L, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Association X(N, K, L);
  const double cap = 1.0 / static_cast<double>(std::max(K, L));
  for (double& v : X.data()) v = cap * u(gen);
  return X;
}

/// Power matrix strictly inside (0, pbar).
inline PowerMatrix random_power(const Scenario& s, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  PowerMatrix P(s.bands(), s.bs());
  for (std::size_t n = 0; n < s.bands(); ++n) {
    for (std::size_t l = 0; l < s.bs(); ++l) P(n, l) = u(gen) * s.power_budget(l, n);
  }
  return P;
}

}  // namespace hetnet::test
