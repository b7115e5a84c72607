#include "hetnet/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "hetnet/errors.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

using nlohmann::json;

Scenario::Scenario(std::size_t users, std::size_t bs, std::size_t bands, double total_bandwidth_hz,
                   double noise_power_w, std::vector<double> gains,
                   std::vector<double> power_budget_w, std::vector<double> on_power_w,
                   std::vector<BsKind> bs_kind)
    : users_(users),
      bs_(bs),
      bands_(bands),
      bandwidth_(total_bandwidth_hz),
      noise_(noise_power_w),
      gains_(std::move(gains)),
      budget_(bands, bs),
      on_power_(std::move(on_power_w)),
      kind_(std::move(bs_kind)) {
  if (users_ == 0 || bs_ == 0 || bands_ == 0) {
    throw InvalidArgument("scenario needs K, L, N >= 1");
  }
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) throw InvalidArgument("bandwidth must be positive");
  if (!(noise_ > 0.0) || !std::isfinite(noise_)) throw InvalidArgument("noise power must be positive");
  if (gains_.size() != users_ * bs_ * bands_) throw InvalidArgument("gains has wrong size");
  if (power_budget_w.size() != bands_ * bs_) throw InvalidArgument("power budget has wrong size");
  if (on_power_.size() != bs_ || kind_.size() != bs_) throw InvalidArgument("per-BS arrays have wrong size");
  for (double g : gains_) {
    if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("gains must be positive and finite");
  }
  for (std::size_t i = 0; i < power_budget_w.size(); ++i) {
    const double v = power_budget_w[i];
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("power budgets must be positive");
    budget_.data()[i] = v;
  }
  for (double v : on_power_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("on-powers must be positive");
  }
}

double dbm_per_hz_to_watts(double psd_dbm_hz, double bandwidth_hz) {
  return std::pow(10.0, (psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
}

double pathloss_db(const TopologyConfig& cfg, double distance_km) {
  return cfg.pathloss_intercept_db + cfg.pathloss_slope_db * std::log10(distance_km);
}

double wrap_distance(const Layout& layout, Point a, Point b) {
  double best = INFINITY;
  for (const Point& s : layout.wrap_shifts) {
    best = std::min(best, std::hypot(a.x - (b.x + s.x), a.y - (b.y + s.y)));
  }
  return best;
}

void validate(const TopologyConfig& cfg) {
  if (cfg.cells != 1 && cfg.cells != 7) throw ParseError("cells", "only 1 or 7 cells are supported");
  if (cfg.users_total <= 0) throw ParseError("users_total", "must be positive");
  if (cfg.picos_per_cell < 0) throw ParseError("picos_per_cell", "must be nonnegative");
  if (!(cfg.cell_radius_km > 0.0)) throw ParseError("cell_radius_km", "must be positive");
  if (!(cfg.min_distance_km > 0.0)) throw ParseError("min_distance_km", "must be positive");
  if (cfg.pico_macro_min_distance_km < 0.0 ||
      cfg.pico_macro_min_distance_km >= 0.8 * cfg.cell_radius_km) {
    throw ParseError("pico_macro_min_distance_km", "must lie in [0, 0.8 * cell radius)");
  }
  if (!(cfg.pico_fixed_offset > 0.0 && cfg.pico_fixed_offset < 0.85)) {
    throw ParseError("pico_fixed_offset", "must lie in (0, 0.85)");
  }
  if (!(cfg.shadowing_std_db >= 0.0)) throw ParseError("shadowing_std_db", "must be nonnegative");
  if (!(cfg.total_bandwidth_hz > 0.0)) throw ParseError("total_bandwidth_hz", "must be positive");
  if (cfg.num_bands <= 0) throw ParseError("num_bands", "must be positive");
  if (!(cfg.macro_on_power_w > 0.0)) throw ParseError("macro_on_power_w", "must be positive");
  if (!(cfg.pico_on_power_w > 0.0)) throw ParseError("pico_on_power_w", "must be positive");
}

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

// Pointy-top hexagon centred at the origin: faces normal to 0, 60, 120 degrees.
bool in_hexagon(Point p, double apothem) {
  return std::abs(p.x) <= apothem && std::abs(0.5 * p.x + 0.5 * kSqrt3 * p.y) <= apothem &&
         std::abs(-0.5 * p.x + 0.5 * kSqrt3 * p.y) <= apothem;
}

Point uniform_in_hexagon(Rng& rng, Point centre, double radius) {
  const double apothem = 0.5 * kSqrt3 * radius;
  for (;;) {
    const Point p{rng.uniform(-apothem, apothem), rng.uniform(-radius, radius)};
    if (in_hexagon(p, apothem)) return {centre.x + p.x, centre.y + p.y};
  }
}

Point rotate(Point p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

}  // namespace

Layout generate_layout(const TopologyConfig& cfg) {
  validate(cfg);
  const double isd = kSqrt3 * cfg.cell_radius_km;
  Layout layout;

  std::vector<Point> centres{{0.0, 0.0}};
  if (cfg.cells == 7) {
    for (int i = 0; i < 6; ++i) centres.push_back(rotate({isd, 0.0}, i * std::numbers::pi / 3.0));
  }

  layout.wrap_shifts.push_back({0.0, 0.0});
  if (cfg.cells == 7 && cfg.wrap_around) {
    // The 7-cell cluster tiles the plane with period 2u + v (|.| = sqrt(7) ISD).
    const Point period{2.5 * isd, 0.5 * kSqrt3 * isd};
    for (int i = 0; i < 6; ++i) layout.wrap_shifts.push_back(rotate(period, i * std::numbers::pi / 3.0));
  }

  for (const Point& c : centres) {
    layout.bs.push_back(c);
    layout.kind.push_back(BsKind::macro);
  }

  // Draw order: picos (cell by cell), users, then shadowing in scenario_from_layout.
  Rng rng(cfg.rng_seed);
  for (const Point& c : centres) {
    for (int j = 0; j < cfg.picos_per_cell; ++j) {
      Point p;
      if (cfg.pico_placement == PicoPlacement::fixed) {
        const double angle = 2.0 * std::numbers::pi * j / cfg.picos_per_cell;
        const Point off = rotate({cfg.pico_fixed_offset * cfg.cell_radius_km, 0.0}, angle);
        p = {c.x + off.x, c.y + off.y};
      } else {
        do {
          p = uniform_in_hexagon(rng, c, cfg.cell_radius_km);
        } while (std::hypot(p.x - c.x, p.y - c.y) < cfg.pico_macro_min_distance_km);
      }
      layout.bs.push_back(p);
      layout.kind.push_back(BsKind::pico);
    }
  }

  for (int k = 0; k < cfg.users_total; ++k) {
    const Point& c = centres[rng.below(centres.size())];
    layout.users.push_back(uniform_in_hexagon(rng, c, cfg.cell_radius_km));
  }
  return layout;
}

Scenario scenario_from_layout(const TopologyConfig& cfg, const Layout& layout) {
  validate(cfg);
  const std::size_t K = layout.users.size();
  const std::size_t L = layout.bs.size();
  const std::size_t N = static_cast<std::size_t>(cfg.num_bands);
  if (K == 0) throw InvalidArgument("no users");
  if (L == 0) throw InvalidArgument("no base stations");

  // Skip the layout's draws so shadowing is independent of how the layout was obtained.
  Rng rng(cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> link_gain(K * L);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = 0; l < L; ++l) {
      const double d = std::max(wrap_distance(layout, layout.users[k], layout.bs[l]), cfg.min_distance_km);
      const double shadow = cfg.shadowing_std_db > 0.0 ? rng.normal(0.0, cfg.shadowing_std_db) : 0.0;
      link_gain[k * L + l] = std::pow(10.0, -(pathloss_db(cfg, d) + shadow) / 10.0);
    }
  }

  std::vector<double> gains(N * K * L);
  for (std::size_t n = 0; n < N; ++n) {
    std::copy(link_gain.begin(), link_gain.end(), gains.begin() + n * K * L);
  }

  const double band_hz = cfg.total_bandwidth_hz / static_cast<double>(N);
  std::vector<double> budget(N * L), psi(L);
  for (std::size_t l = 0; l < L; ++l) {
    const bool macro = layout.kind[l] == BsKind::macro;
    const double per_band = dbm_per_hz_to_watts(macro ? cfg.macro_psd_dbm_hz : cfg.pico_psd_dbm_hz, band_hz);
    for (std::size_t n = 0; n < N; ++n) budget[n * L + l] = per_band;
    psi[l] = macro ? cfg.macro_on_power_w : cfg.pico_on_power_w;
  }
  return Scenario(K, L, N, cfg.total_bandwidth_hz, dbm_per_hz_to_watts(cfg.noise_psd_dbm_hz, band_hz),
                  std::move(gains), std::move(budget), std::move(psi), layout.kind);
}

Scenario generate_scenario(const TopologyConfig& cfg) {
  return scenario_from_layout(cfg, generate_layout(cfg));
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const Scenario& s) {
  const std::size_t K = s.users(), L = s.bs(), N = s.bands();
  json gains = json::array();
  for (std::size_t k = 0; k < K; ++k) {
    json row = json::array();
    for (std::size_t l = 0; l < L; ++l) {
      json bands = json::array();
      for (std::size_t n = 0; n < N; ++n) bands.push_back(s.gain(k, l, n));
      row.push_back(std::move(bands));
    }
    gains.push_back(std::move(row));
  }
  json pbar = json::array();
  for (std::size_t l = 0; l < L; ++l) {
    json bands = json::array();
    for (std::size_t n = 0; n < N; ++n) bands.push_back(s.power_budget(l, n));
    pbar.push_back(std::move(bands));
  }
  json kinds = json::array();
  for (BsKind k : s.kinds()) kinds.push_back(k == BsKind::macro ? "macro" : "pico");

  json j;
  j["K"] = K;
  j["L"] = L;
  j["N"] = N;
  j["W_hz"] = s.total_bandwidth_hz();
  j["sigma2_w"] = s.noise_power_w();
  j["gains"] = std::move(gains);
  j["pbar_w"] = std::move(pbar);
  j["psi_w"] = std::vector<double>(s.on_power().begin(), s.on_power().end());
  j["bs_kind"] = std::move(kinds);
  return j;
}

namespace {

const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw ParseError("<root>", "expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(name, "missing field");
  return *it;
}

std::size_t positive_count(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number_integer()) throw ParseError(name, "expected an integer");
  const auto n = v.get<long long>();
  if (n <= 0) throw ParseError(name, "must be positive");
  return static_cast<std::size_t>(n);
}

double number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ParseError(name, "expected a number");
  return v.get<double>();
}

const json& sized_array(const json& v, std::size_t size, const std::string& name) {
  if (!v.is_array() || v.size() != size) {
    throw ParseError(name, "expected an array of length " + std::to_string(size));
  }
  return v;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  const std::size_t K = positive_count(j, "K");
  const std::size_t L = positive_count(j, "L");
  const std::size_t N = positive_count(j, "N");
  const double W = number(field(j, "W_hz"), "W_hz");
  const double sigma2 = number(field(j, "sigma2_w"), "sigma2_w");

  std::vector<double> gains(N * K * L);
  const json& g = sized_array(field(j, "gains"), K, "gains");
  for (std::size_t k = 0; k < K; ++k) {
    const json& row = sized_array(g[k], L, "gains");
    for (std::size_t l = 0; l < L; ++l) {
      const json& bands = sized_array(row[l], N, "gains");
      for (std::size_t n = 0; n < N; ++n) gains[(n * K + k) * L + l] = number(bands[n], "gains");
    }
  }

  std::vector<double> budget(N * L);
  const json& pb = sized_array(field(j, "pbar_w"), L, "pbar_w");
  for (std::size_t l = 0; l < L; ++l) {
    const json& bands = sized_array(pb[l], N, "pbar_w");
    for (std::size_t n = 0; n < N; ++n) budget[n * L + l] = number(bands[n], "pbar_w");
  }

  std::vector<double> psi(L);
  const json& ps = sized_array(field(j, "psi_w"), L, "psi_w");
  for (std::size_t l = 0; l < L; ++l) psi[l] = number(ps[l], "psi_w");

  std::vector<BsKind> kinds(L);
  const json& bk = sized_array(field(j, "bs_kind"), L, "bs_kind");
  for (std::size_t l = 0; l < L; ++l) {
    if (bk[l] == "macro") {
      kinds[l] = BsKind::macro;
    } else if (bk[l] == "pico") {
      kinds[l] = BsKind::pico;
    } else {
      throw ParseError("bs_kind", "expected \"macro\" or \"pico\"");
    }
  }

  try {
    return Scenario(K, L, N, W, sigma2, std::move(gains), std::move(budget), std::move(psi),
                    std::move(kinds));
  } catch (const InvalidArgument& e) {
    throw ParseError("<scenario>", e.what());
  }
}

void save_scenario(const Scenario& s, const std::filesystem::path& path, const json& provenance) {
  json j = to_json(s);
  j["scenario_hash"] = scenario_hash(s);
  if (!provenance.is_null()) j["provenance"] = provenance;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), e.what());
  }
  return scenario_from_json(j);
}

std::string scenario_hash(const Scenario& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Topology config

json to_json(const TopologyConfig& c) {
  return json{{"cells", c.cells},
              {"picos_per_cell", c.picos_per_cell},
              {"users_total", c.users_total},
              {"cell_radius_km", c.cell_radius_km},
              {"min_distance_km", c.min_distance_km},
              {"pico_placement", c.pico_placement == PicoPlacement::fixed ? "fixed" : "uniform"},
              {"pico_macro_min_distance_km", c.pico_macro_min_distance_km},
              {"pico_fixed_offset", c.pico_fixed_offset},
              {"pathloss_intercept_db", c.pathloss_intercept_db},
              {"pathloss_slope_db", c.pathloss_slope_db},
              {"shadowing_std_db", c.shadowing_std_db},
              {"total_bandwidth_hz", c.total_bandwidth_hz},
              {"num_bands", c.num_bands},
              {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
              {"macro_psd_dbm_hz", c.macro_psd_dbm_hz},
              {"pico_psd_dbm_hz", c.pico_psd_dbm_hz},
              {"macro_on_power_w", c.macro_on_power_w},
              {"pico_on_power_w", c.pico_on_power_w},
              {"wrap_around", c.wrap_around},
              {"rng_seed", c.rng_seed}};
}

TopologyConfig topology_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("<root>", "expected a JSON object");
  TopologyConfig c;
  auto integer = [](int& dst) {
    return [&dst](const json& v, const std::string& k) {
      if (!v.is_number_integer()) throw ParseError(k, "expected an integer");
      dst = v.get<int>();
    };
  };
  auto real = [](double& dst) {
    return [&dst](const json& v, const std::string& k) { dst = number(v, k); };
  };
  const std::map<std::string, std::function<void(const json&, const std::string&)>> setters{
      {"cells", integer(c.cells)},
      {"picos_per_cell", integer(c.picos_per_cell)},
      {"users_total", integer(c.users_total)},
      {"cell_radius_km", real(c.cell_radius_km)},
      {"min_distance_km", real(c.min_distance_km)},
      {"pico_placement",
       [&c](const json& v, const std::string& k) {
         if (v == "uniform") {
           c.pico_placement = PicoPlacement::uniform;
         } else if (v == "fixed") {
           c.pico_placement = PicoPlacement::fixed;
         } else {
           throw ParseError(k, "expected \"uniform\" or \"fixed\"");
         }
       }},
      {"pico_macro_min_distance_km", real(c.pico_macro_min_distance_km)},
      {"pico_fixed_offset", real(c.pico_fixed_offset)},
      {"pathloss_intercept_db", real(c.pathloss_intercept_db)},
      {"pathloss_slope_db", real(c.pathloss_slope_db)},
      {"shadowing_std_db", real(c.shadowing_std_db)},
      {"total_bandwidth_hz", real(c.total_bandwidth_hz)},
      {"num_bands", integer(c.num_bands)},
      {"noise_psd_dbm_hz", real(c.noise_psd_dbm_hz)},
      {"macro_psd_dbm_hz", real(c.macro_psd_dbm_hz)},
      {"pico_psd_dbm_hz", real(c.pico_psd_dbm_hz)},
      {"macro_on_power_w", real(c.macro_on_power_w)},
      {"pico_on_power_w", real(c.pico_on_power_w)},
      {"wrap_around",
       [&c](const json& v, const std::string& k) {
         if (!v.is_boolean()) throw ParseError(k, "expected true or false");
         c.wrap_around = v.get<bool>();
       }},
      {"rng_seed",
       [&c](const json& v, const std::string& k) {
         if (!v.is_number_unsigned()) throw ParseError(k, "expected a nonnegative integer");
         c.rng_seed = v.get<std::uint64_t>();
       }},
  };
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ParseError(key, "unknown topology field");
    it->second(value, key);
  }
  validate(c);
  return c;
}

TopologyConfig load_topology_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return topology_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
      throw ParseError(path.string(), e.what());
    }
  }

  json j = json::object();
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno), "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    json v = json::parse(value, nullptr, false);
    j[key] = v.is_discarded() ? json(value) : v;
  }
  return topology_from_json(j);
}

}  // namespace hetnet
