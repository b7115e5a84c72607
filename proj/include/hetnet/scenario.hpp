#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetnet/types.hpp"

namespace hetnet {

/// Immutable network instance. Powers in watts, gains linear, bandwidth in Hz.
class Scenario {
 public:
  /// gains: band-major, gains[(n*K + k)*L + l]; power_budget: N x L row-major.
  /// Throws InvalidArgument when an invariant fails.
  Scenario(std::size_t users, std::size_t bs, std::size_t bands, double total_bandwidth_hz,
           double noise_power_w, std::vector<double> gains, std::vector<double> power_budget_w,
           std::vector<double> on_power_w, std::vector<BsKind> bs_kind);

  std::size_t users() const { return users_; }
  std::size_t bs() const { return bs_; }
  std::size_t bands() const { return bands_; }
  double total_bandwidth_hz() const { return bandwidth_; }
  double band_width_hz() const { return bandwidth_ / static_cast<double>(bands_); }
  double noise_power_w() const { return noise_; }

  double gain(std::size_t k, std::size_t l, std::size_t n) const {
    return gains_[(n * users_ + k) * bs_ + l];
  }
  /// K x L row-major gains of band n.
  std::span<const double> band_gains(std::size_t n) const {
    return {gains_.data() + n * users_ * bs_, users_ * bs_};
  }
  /// Row k of band n's gain block, length L.
  std::span<const double> user_gains(std::size_t n, std::size_t k) const {
    return {gains_.data() + (n * users_ + k) * bs_, bs_};
  }

  double power_budget(std::size_t l, std::size_t n) const { return budget_(n, l); }
  const PowerMatrix& power_budget() const { return budget_; }
  double on_power(std::size_t l) const { return on_power_[l]; }
  std::span<const double> on_power() const { return on_power_; }
  BsKind kind(std::size_t l) const { return kind_[l]; }
  std::span<const BsKind> kinds() const { return kind_; }

  friend bool operator==(const Scenario&, const Scenario&) = default;

 private:
  std::size_t users_, bs_, bands_;
  double bandwidth_, noise_;
  std::vector<double> gains_;
  PowerMatrix budget_;
  std::vector<double> on_power_;
  std::vector<BsKind> kind_;
};

enum class PicoPlacement { uniform, fixed };

struct TopologyConfig {
  int cells = 7;  // 1 or 7; 7 uses wrap-around
  int picos_per_cell = 3;
  int users_total = 63;
  double cell_radius_km = 0.8 / 1.7320508075688772;  // hexagon circumradius (ISD 0.8 km)
  double min_distance_km = 0.01;
  PicoPlacement pico_placement = PicoPlacement::uniform;
  double pico_macro_min_distance_km = 0.075;
  double pico_fixed_offset = 0.5;  // fraction of the cell radius for fixed placement
  double pathloss_intercept_db = 128.1;
  double pathloss_slope_db = 37.6;
  double shadowing_std_db = 8.0;
  double total_bandwidth_hz = 10e6;
  int num_bands = 16;
  double noise_psd_dbm_hz = -169.0;
  double macro_psd_dbm_hz = -27.0;
  double pico_psd_dbm_hz = -47.0;
  double macro_on_power_w = 1450.0;
  double pico_on_power_w = 21.32;
  bool wrap_around = true;
  std::uint64_t rng_seed = 1;
};

struct Point {
  double x = 0.0, y = 0.0;
};

/// BS and user positions in km. BSs are ordered macros first (one per cell,
/// cell order), then picos (cell by cell).
struct Layout {
  std::vector<Point> bs;
  std::vector<BsKind> kind;
  std::vector<Point> users;
  std::vector<Point> wrap_shifts;  // translations of the mirror images, first is (0,0)
};

double dbm_per_hz_to_watts(double psd_dbm_hz, double bandwidth_hz);
double pathloss_db(const TopologyConfig& cfg, double distance_km);

/// Minimum distance between a and any mirror image of b.
double wrap_distance(const Layout& layout, Point a, Point b);

void validate(const TopologyConfig& cfg);
Layout generate_layout(const TopologyConfig& cfg);
Scenario generate_scenario(const TopologyConfig& cfg);
/// Builds the scenario for an already drawn layout (shadowing still drawn from cfg.rng_seed).
Scenario scenario_from_layout(const TopologyConfig& cfg, const Layout& layout);

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
void save_scenario(const Scenario& s, const std::filesystem::path& path,
                   const nlohmann::json& provenance = nullptr);
Scenario load_scenario(const std::filesystem::path& path);

/// 16-hex-digit FNV-1a hash of the canonical scenario JSON.
std::string scenario_hash(const Scenario& s);

nlohmann::json to_json(const TopologyConfig& cfg);
TopologyConfig topology_from_json(const nlohmann::json& j);
/// Reads a JSON object or flat "key = value" lines ('#' starts a comment).
TopologyConfig load_topology_config(const std::filesystem::path& path);

}  // namespace hetnet
