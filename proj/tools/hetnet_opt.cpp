// hetnet-opt: scenario generation, single solves, lambda sweeps and rate CDFs.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hetnet/errors.hpp"
#include "hetnet/harness.hpp"
#include "hetnet/scenario.hpp"

namespace fs = std::filesystem;
using namespace hetnet;

namespace {

enum Exit { ok = 0, other = 1, parse = 2, infeasible = 3, stall = 4 };

struct SolverFlags {
  std::string config;
  std::optional<double> lambda;
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::optional<std::uint64_t> seed;

  SolverConfig build() const {
    SolverConfig c = config.empty() ? SolverConfig{} : load_solver_config(config);
    if (lambda) c.lambda = *lambda;
    if (tol) c.tol = *tol;
    if (max_iters) c.max_outer_iters = *max_iters;
    if (seed) c.rng_seed = *seed;
    try {
      c.validate();
    } catch (const InvalidArgument& e) {
      throw ParseError("config", e.what());
    }
    return c;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f, bool with_lambda) {
  cmd->add_option("--config", f.config, "solver options (JSON)")->check(CLI::ExistingFile);
  if (with_lambda) cmd->add_option("--lambda", f.lambda, "power price (1/W)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--tol", f.tol, "relative objective tolerance per round")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", f.max_iters, "BCGA round cap")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "seed recorded in the result metadata");
}

void init_logging() {
  auto logger = spdlog::stderr_color_mt("hetnet");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("HETNET_OPT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("HETNET_OPT_LOG='{}' is not a log level; using info", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

int cmd_generate(const std::string& config, std::optional<std::uint64_t> seed,
                 const std::vector<std::uint64_t>& seeds, const std::string& out) {
  TopologyConfig cfg = config.empty() ? TopologyConfig{} : load_topology_config(config);
  if (seeds.empty()) {
    if (seed) cfg.rng_seed = *seed;
    const Scenario s = generate_scenario(cfg);
    save_scenario(s, out, {{"topology", to_json(cfg)}});
    spdlog::info("wrote {} (K={}, L={}, N={}, hash {})", out, s.users(), s.bs(), s.bands(), scenario_hash(s));
    return ok;
  }
  fs::create_directories(out);
  for (std::uint64_t sd : seeds) {
    cfg.rng_seed = sd;
    const Scenario s = generate_scenario(cfg);
    const fs::path path = fs::path(out) / ("scenario_seed" + std::to_string(sd) + ".json");
    save_scenario(s, path, {{"topology", to_json(cfg)}});
    spdlog::info("wrote {} (hash {})", path.string(), scenario_hash(s));
  }
  return ok;
}

int cmd_solve(const std::string& scenario, const std::string& method, const SolverFlags& flags,
              const std::string& out) {
  const Scenario s = load_scenario(scenario);
  const SolverConfig cfg = flags.build();
  const Run run = run_method(s, parse_method(method), cfg);
  write_json(out, result_to_json(s, cfg, run));
  const auto& r = run.result;
  spdlog::info("{}: objective {:.9g}, utility {:.9g}, power {:.6g} W, {} active BSs, {} rounds, {:.2f} s",
               method, r.full_objective, r.utility, r.total_power_w, r.active_bs.size(), r.iterations,
               run.seconds);
  if (r.status == SolveStatus::stalled) {
    spdlog::error("solver stalled: no block could make progress before the tolerance was met");
    return stall;
  }
  return ok;
}

int cmd_sweep(const std::string& scenario, const std::string& methods, const std::string& lambdas,
              const SolverFlags& flags, int workers, const std::string& out) {
  const Scenario s = load_scenario(scenario);
  const SolverConfig cfg = flags.build();
  const auto ms = parse_methods(methods);
  nlohmann::json meta{{"scenario_hash", scenario_hash(s)}, {"config", to_json(cfg)}, {"methods", methods}};
  std::vector<double> grid;
  if (lambdas.empty()) {
    const auto cal = calibrate_lambdas(s, cfg);
    grid = cal.grid;
    meta["calibration"] = {{"probed", cal.probed}, {"active", cal.active}};
  } else {
    grid = parse_lambdas(lambdas);
  }
  meta["lambdas"] = grid;

  const auto rows = run_sweep(s, ms, grid, cfg, workers);
  const fs::path dir(out);
  write_sweep_csv(dir / "tradeoff.csv", rows);
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& r : rows) {
    if (!r.error.empty()) failures.push_back({{"method", method_name(r.method)}, {"lambda", r.lambda}, {"error", r.error}});
  }
  meta["failures"] = failures;
  write_json(dir / "tradeoff.meta.json", meta);
  spdlog::info("wrote {} rows to {}", rows.size(), (dir / "tradeoff.csv").string());
  return failures.empty() ? ok : other;
}

int cmd_cdf(const std::vector<std::string>& inputs, const std::string& out) {
  if (inputs.empty()) throw InvalidArgument("cdf needs at least one result file");
  std::vector<RateSet> sets;
  nlohmann::json per_file = nlohmann::json::array();
  std::map<std::string, std::string> hashes;
  for (const auto& path : inputs) {
    sets.push_back(load_rates(path));
    const auto j = read_json(path);
    per_file.push_back({{"file", path},
                        {"method", sets.back().method},
                        {"scenario_hash", j.value("scenario_hash", "")},
                        {"p10_bps", percentile(sets.back().rates_bps, 0.10)},
                        {"p50_bps", percentile(sets.back().rates_bps, 0.50)}});
  }
  const auto rows = build_cdf(sets);
  write_cdf_csv(out, rows);

  nlohmann::json summary{{"inputs", per_file}, {"methods", nlohmann::json::object()}};
  std::map<std::string, std::vector<double>> pooled;
  for (const auto& set : sets) pooled[set.method].insert(pooled[set.method].end(), set.rates_bps.begin(), set.rates_bps.end());
  for (const auto& [method, rates] : pooled) {
    const double p10 = percentile(rates, 0.10), p50 = percentile(rates, 0.50);
    summary["methods"][method] = {{"p10_bps", p10}, {"p50_bps", p50}, {"samples", rates.size()}};
    std::cout << method << ": p10 " << p10 << " bit/s, p50 " << p50 << " bit/s (" << rates.size() << " rates)\n";
  }
  fs::path summary_path(out);
  summary_path.replace_extension(".summary.json");
  write_json(summary_path, summary);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Joint user association and BS power optimization for heterogeneous networks"};
  app.require_subcommand(1);

  std::string config, scenario, method = "proposed", lambdas, out;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
  int workers = 1;
  SolverFlags solve_flags, sweep_flags;

  auto* gen = app.add_subcommand("generate", "draw a scenario and write it as JSON");
  gen->add_option("--config", config, "topology config (JSON or key = value lines)")->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "drop seed");
  gen->add_option("--seeds", seeds, "several drop seeds; --out is then a directory")->delimiter(',');
  gen->add_option("--out", out, "output file")->required();

  auto* solve = app.add_subcommand("solve", "solve one scenario with one method");
  solve->add_option("--scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--method", method, "proposed | greedy | maxsinr | loadbal");
  add_solver_flags(solve, solve_flags, true);
  solve->add_option("--out", out, "result JSON")->required();

  auto* sweep = app.add_subcommand("sweep", "solve over a lambda grid and write the trade-off CSV");
  sweep->add_option("--scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--method", method, "comma-separated methods")->default_str("proposed,greedy");
  sweep->add_option("--lambdas", lambdas, "comma-separated lambdas; calibrated when omitted");
  sweep->add_option("--workers", workers, "concurrent solves")->check(CLI::PositiveNumber);
  add_solver_flags(sweep, sweep_flags, false);
  sweep->add_option("--out", out, "output directory")->required();

  auto* cdf = app.add_subcommand("cdf", "merge per-user rates into CDF rows");
  cdf->add_option("results", inputs, "result JSON files")->required()->check(CLI::ExistingFile);
  cdf->add_option("--out", out, "CDF CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : parse;
  }

  try {
    if (gen->parsed()) return cmd_generate(config, seed, seeds, out);
    if (solve->parsed()) return cmd_solve(scenario, method, solve_flags, out);
    if (sweep->parsed()) {
      if (sweep->count("--method") == 0) method = "proposed,greedy";
      return cmd_sweep(scenario, method, lambdas, sweep_flags, workers, out);
    }
    if (cdf->parsed()) return cmd_cdf(inputs, out);
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return parse;
  } catch (const Infeasible& e) {
    spdlog::error("infeasible: {}", e.what());
    return infeasible;
  } catch (const StarvedUser& e) {
    spdlog::error("infeasible: {}", e.what());
    return infeasible;
  } catch (const DualNonConvergence& e) {
    spdlog::error("solver stalled: {}", e.what());
    return stall;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return other;
  }
  return other;
}
