#pragma once
// Method dispatch, result serialization, lambda sweeps and rate CDFs used by
// the hetnet-opt command line tool.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetnet/baselines.hpp"
#include "hetnet/bcga.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet {

enum class Method { proposed, greedy, maxsinr, loadbal };

Method parse_method(std::string_view name);  // throws ParseError("method", ...)
std::string_view method_name(Method m);
std::vector<Method> parse_methods(std::string_view comma_list);
std::vector<double> parse_lambdas(std::string_view comma_list);

struct Run {
  Method method = Method::proposed;
  SolveResult result;
  double seconds = 0.0;
  OffSet greedy_off;  // greedy only
  int greedy_tests = 0;
};

/// Solves `s` with `cfg.lambda` using the chosen method.
Run run_method(const Scenario& s, Method m, const SolverConfig& cfg);

nlohmann::json to_json(const SolverConfig& cfg);
/// Missing keys keep their defaults; unknown keys are a ParseError.
SolverConfig solver_config_from_json(const nlohmann::json& j);
SolverConfig load_solver_config(const std::filesystem::path& path);

/// Everything but "wall_time_s" is a deterministic function of the inputs.
nlohmann::json result_to_json(const Scenario& s, const SolverConfig& cfg, const Run& run);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

struct SweepRow {
  Method method = Method::proposed;
  double lambda = 0.0;
  double utility = 0.0;
  double total_power_w = 0.0;
  int active_macros = 0;
  int active_picos = 0;
  double seconds = 0.0;
  std::string error;  // empty on success
  std::optional<SolveResult> result;
};

/// One solve per (method, lambda), run on up to `workers` threads. Rows come
/// back ordered by method (as given) then lambda (as given). A failing solve
/// is reported in its row's `error` and does not stop the sweep.
std::vector<SweepRow> run_sweep(const Scenario& s, std::span<const Method> methods,
                                std::span<const double> lambdas, const SolverConfig& cfg,
                                int workers, bool keep_results = false);

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);

struct LambdaCalibration {
  std::vector<double> grid;    // 0 followed by `points - 1` log-spaced values
  std::vector<double> probed;  // lambdas tried while doubling
  std::vector<int> active;     // active BS count at each probe
};

/// Doubles lambda from `start` with the proposed method until the active set
/// cannot shrink any more: a single BS is left, or no pico is on and the count
/// stopped falling (or `max_doublings` is reached).
/// The grid ends at that lambda and starts at half the first lambda that
/// switched a BS off.
LambdaCalibration calibrate_lambdas(const Scenario& s, const SolverConfig& cfg, int points = 10,
                                    double start = 1e-3, int max_doublings = 24);

/// Nearest-rank percentile, q in (0, 1]. Throws InvalidArgument on empty input.
double percentile(std::vector<double> values, double q);

struct CdfRow {
  std::string method;
  double rate_bps = 0.0;
  double cdf = 0.0;
};

struct RateSet {
  std::string method;
  std::vector<double> rates_bps;
};

/// Empirical CDF per method over the pooled rates, methods in first-seen order.
std::vector<CdfRow> build_cdf(std::span<const RateSet> sets);
void write_cdf_csv(const std::filesystem::path& path, std::span<const CdfRow> rows);

/// Reads "method" and "rates_bps" from a result file.
RateSet load_rates(const std::filesystem::path& result_path);

}  // namespace hetnet
