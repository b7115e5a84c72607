#include <cmath>
#include <fstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "hetnet/errors.hpp"
#include "hetnet/scenario.hpp"
#include "test_util.hpp"

using namespace hetnet;
using nlohmann::json;

namespace {

json scenario_json(const Scenario& s) { return to_json(s); }

}  // namespace

TEST_CASE("default topology has 63 users, 28 BSs and 16 bands") {
  const Scenario s = generate_scenario(TopologyConfig{});
  CHECK(s.users() == 63);
  CHECK(s.bs() == 28);
  CHECK(s.bands() == 16);
  for (std::size_t l = 0; l < 7; ++l) CHECK(s.kind(l) == BsKind::macro);
  for (std::size_t l = 7; l < 28; ++l) CHECK(s.kind(l) == BsKind::pico);
  CHECK(s.on_power(0) == 1450.0);
  CHECK(s.on_power(27) == 21.32);
  CHECK(s.total_bandwidth_hz() == 10e6);
}

TEST_CASE("same seed gives the same scenario, another seed does not") {
  TopologyConfig cfg;
  cfg.rng_seed = 42;
  const Scenario a = generate_scenario(cfg);
  const Scenario b = generate_scenario(cfg);
  CHECK(a == b);
  CHECK(scenario_hash(a) == scenario_hash(b));
  cfg.rng_seed = 43;
  const Scenario c = generate_scenario(cfg);
  CHECK_FALSE(a == c);
  CHECK(scenario_hash(a) != scenario_hash(c));
}

TEST_CASE("path loss at 100 m without shadowing") {
  TopologyConfig cfg;
  cfg.cells = 1;
  cfg.picos_per_cell = 0;
  cfg.shadowing_std_db = 0.0;
  cfg.wrap_around = false;
  cfg.num_bands = 4;
  Layout layout;
  layout.bs = {{0.0, 0.0}};
  layout.kind = {BsKind::macro};
  layout.users = {{0.1, 0.0}};
  layout.wrap_shifts = {{0.0, 0.0}};
  const Scenario s = scenario_from_layout(cfg, layout);

  CHECK(pathloss_db(cfg, 0.1) == doctest::Approx(90.5).epsilon(1e-12));
  const double expected = std::pow(10.0, -9.05);
  for (std::size_t n = 0; n < s.bands(); ++n) {
    CHECK(std::abs(s.gain(0, 0, n) - expected) <= 1e-12 * expected);
  }
}

TEST_CASE("users closer than the minimum distance use the minimum distance") {
  TopologyConfig cfg;
  cfg.cells = 1;
  cfg.picos_per_cell = 0;
  cfg.shadowing_std_db = 0.0;
  Layout layout;
  layout.bs = {{0.0, 0.0}};
  layout.kind = {BsKind::macro};
  layout.users = {{0.001, 0.0}};
  layout.wrap_shifts = {{0.0, 0.0}};
  const Scenario s = scenario_from_layout(cfg, layout);
  CHECK(s.gain(0, 0, 0) == doctest::Approx(std::pow(10.0, -pathloss_db(cfg, 0.01) / 10.0)));
}

TEST_CASE("dBm per Hz conversion") {
  CHECK(dbm_per_hz_to_watts(0.0, 1.0) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(dbm_per_hz_to_watts(-169.0, 625000.0) == doctest::Approx(7.87e-15).epsilon(1e-3));
  CHECK(dbm_per_hz_to_watts(-27.0, 625000.0) == doctest::Approx(1.2469).epsilon(1e-4));
  CHECK(dbm_per_hz_to_watts(-47.0, 625000.0) == doctest::Approx(0.012469).epsilon(1e-4));
}

TEST_CASE("default budgets and noise are per band") {
  const Scenario s = generate_scenario(TopologyConfig{});
  CHECK(s.noise_power_w() == doctest::Approx(dbm_per_hz_to_watts(-169.0, 625000.0)));
  for (std::size_t n = 0; n < s.bands(); ++n) {
    CHECK(s.power_budget(0, n) == doctest::Approx(dbm_per_hz_to_watts(-27.0, 625000.0)));
    CHECK(s.power_budget(27, n) == doctest::Approx(dbm_per_hz_to_watts(-47.0, 625000.0)));
  }
}

TEST_CASE("gains are identical across bands") {
  const Scenario s = generate_scenario(TopologyConfig{});
  for (std::size_t k = 0; k < s.users(); ++k) {
    for (std::size_t l = 0; l < s.bs(); ++l) {
      for (std::size_t n = 1; n < s.bands(); ++n) REQUIRE(s.gain(k, l, n) == s.gain(k, l, 0));
    }
  }
}

TEST_CASE("wrap-around distance never exceeds the direct distance") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    TopologyConfig cfg;
    cfg.rng_seed = seed;
    const Layout layout = generate_layout(cfg);
    CHECK(layout.wrap_shifts.size() == 7);
    for (const Point& u : layout.users) {
      for (const Point& b : layout.bs) {
        REQUIRE(wrap_distance(layout, u, b) <= std::hypot(u.x - b.x, u.y - b.y) + 1e-15);
      }
    }
  }
}

TEST_CASE("wrap-around brings far-edge users close to the opposite macros") {
  TopologyConfig cfg;
  const Layout layout = generate_layout(cfg);
  const double isd = std::sqrt(3.0) * cfg.cell_radius_km;
  // Every point of the cluster lies within one cell radius of some macro image.
  for (const Point& u : layout.users) {
    double best = 1e9;
    for (std::size_t l = 0; l < 7; ++l) best = std::min(best, wrap_distance(layout, u, layout.bs[l]));
    REQUIRE(best <= cfg.cell_radius_km + 1e-12);
  }
  // The outer macros are at most one ISD from each other under wrap-around.
  for (std::size_t a = 1; a < 7; ++a) {
    for (std::size_t b = 1; b < 7; ++b) {
      if (a != b) REQUIRE(wrap_distance(layout, layout.bs[a], layout.bs[b]) <= isd + 1e-9);
    }
  }
}

TEST_CASE("generated scenarios satisfy the invariants for many seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TopologyConfig cfg;
    cfg.rng_seed = seed;
    const Scenario s = generate_scenario(cfg);
    for (std::size_t k = 0; k < s.users(); ++k) {
      for (std::size_t l = 0; l < s.bs(); ++l) {
        REQUIRE(s.gain(k, l, 0) > 0.0);
        REQUIRE(std::isfinite(s.gain(k, l, 0)));
      }
    }
  }
}

TEST_CASE("picos keep their distance from the macro and fixed placement is exact") {
  TopologyConfig cfg;
  const Layout uniform = generate_layout(cfg);
  for (std::size_t l = 7; l < 28; ++l) {
    const Point& c = uniform.bs[(l - 7) / 3];
    CHECK(std::hypot(uniform.bs[l].x - c.x, uniform.bs[l].y - c.y) >= cfg.pico_macro_min_distance_km);
  }
  cfg.pico_placement = PicoPlacement::fixed;
  const Layout fixed = generate_layout(cfg);
  for (std::size_t l = 7; l < 28; ++l) {
    const Point& c = fixed.bs[(l - 7) / 3];
    CHECK(std::hypot(fixed.bs[l].x - c.x, fixed.bs[l].y - c.y) ==
          doctest::Approx(cfg.pico_fixed_offset * cfg.cell_radius_km));
  }
}

TEST_CASE("scenario file round trip is exact") {
  test::TempDir dir("scenario");
  const Scenario s = generate_scenario(TopologyConfig{});
  save_scenario(s, dir / "s.json", json{{"note", "x"}});
  const Scenario back = load_scenario(dir / "s.json");
  CHECK(back == s);
  CHECK(scenario_hash(back) == scenario_hash(s));

  std::ifstream in(dir / "s.json");
  const json j = json::parse(in);
  CHECK(j["scenario_hash"] == scenario_hash(s));
  CHECK(j["provenance"]["note"] == "x");
  CHECK(j["gains"].size() == 63);
  CHECK(j["gains"][0].size() == 28);
  CHECK(j["gains"][0][0].size() == 16);
  CHECK(j["pbar_w"].size() == 28);
  CHECK(j["pbar_w"][0].size() == 16);
}

TEST_CASE("malformed scenario files name the offending field") {
  const Scenario s = test::random_scenario(2, 2, 2, 7);
  const json good = scenario_json(s);
  CHECK(scenario_from_json(good) == s);

  auto field_of = [](const json& j) -> std::string {
    try {
      scenario_from_json(j);
    } catch (const ParseError& e) {
      return e.field();
    }
    return "";
  };

  json zero_k = good;
  zero_k["K"] = 0;
  CHECK(field_of(zero_k) == "K");

  json no_psi = good;
  no_psi.erase("psi_w");
  CHECK(field_of(no_psi) == "psi_w");

  json short_gains = good;
  short_gains["gains"].erase(1);
  CHECK(field_of(short_gains) == "gains");

  json bad_kind = good;
  bad_kind["bs_kind"][0] = "femto";
  CHECK(field_of(bad_kind) == "bs_kind");

  json negative = good;
  negative["psi_w"][0] = -1.0;
  CHECK(field_of(negative) == "<scenario>");

  CHECK_THROWS_AS(load_scenario("/nonexistent/s.json"), ParseError);
}

TEST_CASE("scenario constructor rejects broken invariants") {
  auto make = [](double gain, double noise) {
    return Scenario(1, 1, 1, 1.0, noise, {gain}, {1.0}, {1.0}, {BsKind::macro});
  };
  CHECK_NOTHROW(make(1.0, 1.0));
  CHECK_THROWS_AS(make(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make(NAN, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Scenario(0, 1, 1, 1.0, 1.0, {}, {1.0}, {1.0}, {BsKind::macro}), InvalidArgument);
}

TEST_CASE("topology config validation and parsing") {
  TopologyConfig cfg;
  cfg.users_total = 0;
  try {
    validate(cfg);
    FAIL("users_total = 0 accepted");
  } catch (const ParseError& e) {
    CHECK(e.field() == "users_total");
  }

  test::TempDir dir("topology");
  {
    std::ofstream out(dir / "t.conf");
    out << "# small\nusers_total = 5\ncells = 1\npicos_per_cell = 2\npico_placement = fixed\nrng_seed = 9\n";
  }
  const TopologyConfig kv = load_topology_config(dir / "t.conf");
  CHECK(kv.users_total == 5);
  CHECK(kv.cells == 1);
  CHECK(kv.picos_per_cell == 2);
  CHECK(kv.pico_placement == PicoPlacement::fixed);
  CHECK(kv.rng_seed == 9);

  {
    std::ofstream out(dir / "t.json");
    out << to_json(kv).dump();
  }
  const TopologyConfig js = load_topology_config(dir / "t.json");
  CHECK(to_json(js) == to_json(kv));

  {
    std::ofstream out(dir / "bad.json");
    out << R"({"users": 5})";
  }
  try {
    load_topology_config(dir / "bad.json");
    FAIL("unknown key accepted");
  } catch (const ParseError& e) {
    CHECK(e.field() == "users");
  }

  const Scenario small = generate_scenario(kv);
  CHECK(small.users() == 5);
  CHECK(small.bs() == 3);
}
