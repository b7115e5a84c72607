#include "hetnet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "hetnet/errors.hpp"
#include "hetnet/kernels.hpp"
#include "hetnet/objective.hpp"
#include "hetnet/reweight.hpp"

namespace hetnet {

namespace {

using nlohmann::json;

std::vector<std::string_view> split(std::string_view list) {
  std::vector<std::string_view> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    auto item = list.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

std::pair<int, int> count_active(const Scenario& s, const SolveResult& r) {
  int macros = 0, picos = 0;
  for (std::size_t l : r.active_bs) (s.kind(l) == BsKind::macro ? macros : picos)++;
  return {macros, picos};
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(key, e.what());
  }
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "proposed") return Method::proposed;
  if (name == "greedy") return Method::greedy;
  if (name == "maxsinr") return Method::maxsinr;
  if (name == "loadbal") return Method::loadbal;
  throw ParseError("method", "unknown method '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::greedy: return "greedy";
    case Method::maxsinr: return "maxsinr";
    case Method::loadbal: return "loadbal";
  }
  return "unknown";
}

std::vector<Method> parse_methods(std::string_view comma_list) {
  std::vector<Method> out;
  for (auto item : split(comma_list)) out.push_back(parse_method(item));
  if (out.empty()) throw ParseError("method", "no method given");
  return out;
}

std::vector<double> parse_lambdas(std::string_view comma_list) {
  std::vector<double> out;
  for (auto item : split(comma_list)) {
    std::string text(item);
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      throw ParseError("lambdas", "'" + text + "' is not a number");
    }
    if (used != text.size() || !(v >= 0.0) || !std::isfinite(v)) {
      throw ParseError("lambdas", "'" + text + "' is not a finite nonnegative number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ParseError("lambdas", "empty list");
  return out;
}

Run run_method(const Scenario& s, Method m, const SolverConfig& cfg) {
  Run run;
  run.method = m;
  const auto t0 = std::chrono::steady_clock::now();
  switch (m) {
    case Method::proposed:
      run.result = solve_sparse(s, cfg);
      break;
    case Method::greedy: {
      GreedyResult g = greedy_turnoff(s, cfg);
      run.result = std::move(g.result);
      run.greedy_off = std::move(g.off);
      run.greedy_tests = g.tests;
      break;
    }
    case Method::maxsinr:
      run.result = solve_max_sinr(s, cfg);
      break;
    case Method::loadbal:
      run.result = solve_load_balanced(s, cfg);
      break;
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

json to_json(const SolverConfig& c) {
  return json{{"lambda", c.lambda},
              {"weights", c.weights},
              {"alpha0", c.alpha0},
              {"beta0", c.beta0},
              {"budget_scaled_steps", c.budget_scaled_steps},
              {"armijo_shrink", c.armijo_shrink},
              {"armijo_slope", c.armijo_slope},
              {"max_halvings", c.max_halvings},
              {"tol", c.tol},
              {"max_outer_iters", c.max_outer_iters},
              {"dual_tol", c.dual.tol},
              {"dual_max_iters", c.dual.max_iters},
              {"dual_initial_step", c.dual.initial_step},
              {"dual_armijo_slope", c.dual.armijo_slope},
              {"eps_off", c.eps_off},
              {"tau0", c.tau0},
              {"tau_decay", c.tau_decay},
              {"tau_floor", c.tau_floor},
              {"max_reweight_iters", c.max_reweight_iters},
              {"weight_tol", c.weight_tol},
              {"drop_rel", c.drop_rel},
              {"refit", c.refit},
              {"rng_seed", c.rng_seed}};
}

SolverConfig solver_config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("config", "expected a JSON object");
  SolverConfig c;
  const json known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ParseError(key, "unknown solver option");
  }
  read_field(j, "lambda", c.lambda);
  read_field(j, "weights", c.weights);
  read_field(j, "alpha0", c.alpha0);
  read_field(j, "beta0", c.beta0);
  read_field(j, "budget_scaled_steps", c.budget_scaled_steps);
  read_field(j, "armijo_shrink", c.armijo_shrink);
  read_field(j, "armijo_slope", c.armijo_slope);
  read_field(j, "max_halvings", c.max_halvings);
  read_field(j, "tol", c.tol);
  read_field(j, "max_outer_iters", c.max_outer_iters);
  read_field(j, "dual_tol", c.dual.tol);
  read_field(j, "dual_max_iters", c.dual.max_iters);
  read_field(j, "dual_initial_step", c.dual.initial_step);
  read_field(j, "dual_armijo_slope", c.dual.armijo_slope);
  read_field(j, "eps_off", c.eps_off);
  read_field(j, "tau0", c.tau0);
  read_field(j, "tau_decay", c.tau_decay);
  read_field(j, "tau_floor", c.tau_floor);
  read_field(j, "max_reweight_iters", c.max_reweight_iters);
  read_field(j, "weight_tol", c.weight_tol);
  read_field(j, "drop_rel", c.drop_rel);
  read_field(j, "refit", c.refit);
  read_field(j, "rng_seed", c.rng_seed);
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError("config", e.what());
  }
  return c;
}

SolverConfig load_solver_config(const std::filesystem::path& path) {
  return solver_config_from_json(read_json(path));
}

json result_to_json(const Scenario& s, const SolverConfig& cfg, const Run& run) {
  const SolveResult& r = run.result;
  const std::size_t N = s.bands(), K = s.users(), L = s.bs();
  json X = json::array();
  for (std::size_t n = 0; n < N; ++n) {
    json band = json::array();
    for (std::size_t k = 0; k < K; ++k) {
      json row = json::array();
      for (std::size_t l = 0; l < L; ++l) row.push_back(r.X(n, k, l));
      band.push_back(std::move(row));
    }
    X.push_back(std::move(band));
  }
  json P = json::array();
  for (std::size_t n = 0; n < N; ++n) {
    json row = json::array();
    for (std::size_t l = 0; l < L; ++l) row.push_back(r.P(n, l));
    P.push_back(std::move(row));
  }
  const auto [macros, picos] = count_active(s, r);

  json meta{{"bcga", "alternating projected-gradient X step and proximal-gradient P step, Armijo backtracking"},
            {"projection", "dual projected Newton per band"},
            {"isa", kernels::isa_name(kernels::active_isa())}};
  switch (run.method) {
    case Method::proposed:
      meta["sparsity"] = "iteratively reweighted group penalty";
      break;
    case Method::greedy:
      meta["test_order"] = "macros then picos, two passes";
      meta["off_bs"] = run.greedy_off;
      meta["tests"] = run.greedy_tests;
      break;
    case Method::maxsinr:
      meta["association"] = "single BS per user and band by maximum SINR at full power";
      break;
    case Method::loadbal:
      meta["association"] =
          "proxy: rounded utility-optimal association at full power, equal time share";
      meta["proxy"] = true;
      break;
  }

  return json{{"method", method_name(run.method)},
              {"scenario_hash", scenario_hash(s)},
              {"config", to_json(cfg)},
              {"lambda", cfg.lambda},
              {"K", K},
              {"L", L},
              {"N", N},
              {"rates_bps", r.rates},
              {"X", std::move(X)},
              {"P", std::move(P)},
              {"objective", r.full_objective},
              {"weighted_objective", r.objective},
              {"utility", r.utility},
              {"power_term", cfg.lambda * r.total_power_w},
              {"total_power_w", r.total_power_w},
              {"active_bs", r.active_bs},
              {"active_macros", macros},
              {"active_picos", picos},
              {"status", status_name(r.status)},
              {"iterations",
               {{"bcga_rounds", r.iterations},
                {"accepted_updates", r.accepted_updates},
                {"outer", r.outer_iterations},
                {"dual", r.dual_iterations}}},
              {"objective_trace", r.objective_trace},
              {"metadata", std::move(meta)},
              {"wall_time_s", run.seconds}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(1) << '\n';
  if (!out) throw Error("write to " + path.string() + " failed");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), e.what());
  }
}

std::vector<SweepRow> run_sweep(const Scenario& s, std::span<const Method> methods,
                                std::span<const double> lambdas, const SolverConfig& cfg,
                                int workers, bool keep_results) {
  std::vector<SweepRow> rows;
  for (Method m : methods) {
    for (double lambda : lambdas) {
      SweepRow row;
      row.method = m;
      row.lambda = lambda;
      rows.push_back(std::move(row));
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      SolverConfig c = cfg;
      c.lambda = row.lambda;
      try {
        Run run = run_method(s, row.method, c);
        const auto [macros, picos] = count_active(s, run.result);
        row.utility = run.result.utility;
        row.total_power_w = run.result.total_power_w;
        row.active_macros = macros;
        row.active_picos = picos;
        row.seconds = run.seconds;
        if (keep_results) row.result = std::move(run.result);
      } catch (const std::exception& e) {
        row.error = e.what();
        row.utility = row.total_power_w = std::numeric_limits<double>::quiet_NaN();
      }
      std::lock_guard lock(log_mutex);
      if (row.error.empty()) {
        spdlog::info("sweep {} lambda={:g}: utility {:.6f}, power {:.3f} W, {}+{} active, {:.2f} s",
                     method_name(row.method), row.lambda, row.utility, row.total_power_w,
                     row.active_macros, row.active_picos, row.seconds);
      } else {
        spdlog::warn("sweep {} lambda={:g} failed: {}", method_name(row.method), row.lambda, row.error);
      }
    }
  };

  const std::size_t n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1,
                                                std::max<std::size_t>(rows.size(), 1));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "method,lambda,utility,total_power_w,active_macros,active_picos,seconds\n";
  for (const auto& r : rows) {
    out << method_name(r.method) << ',' << r.lambda << ',';
    if (r.error.empty()) {
      out << r.utility << ',' << r.total_power_w << ',' << r.active_macros << ',' << r.active_picos;
    } else {
      out << "nan,nan,,";
    }
    out << ',' << r.seconds << '\n';
  }
}

LambdaCalibration calibrate_lambdas(const Scenario& s, const SolverConfig& cfg, int points,
                                    double start, int max_doublings) {
  if (points < 2) throw InvalidArgument("a lambda grid needs at least two points");
  if (!(start > 0.0)) throw InvalidArgument("calibration must start at a positive lambda");
  LambdaCalibration cal;
  double first_shrink = -1.0;
  int prev = static_cast<int>(s.bs());
  double lambda = start;
  for (int d = 0; d <= max_doublings; ++d, lambda *= 2.0) {
    SolverConfig c = cfg;
    c.lambda = lambda;
    const SolveResult r = solve_sparse(s, c);
    const int active = static_cast<int>(r.active_bs.size());
    const int picos = count_active(s, r).second;
    cal.probed.push_back(lambda);
    cal.active.push_back(active);
    spdlog::info("calibrate lambda={:g}: {} active BSs ({} picos)", lambda, active, picos);
    if (active < static_cast<int>(s.bs()) && first_shrink < 0.0) first_shrink = lambda;
    const bool stopped = d > 0 && active >= prev;
    prev = active;
    if (active <= 1 || (picos == 0 && stopped)) break;
  }
  const double hi = cal.probed.back();
  const double lo = first_shrink > 0.0 ? std::min(first_shrink / 2.0, hi / 2.0) : hi / 1024.0;
  cal.grid.push_back(0.0);
  const int m = points - 1;
  for (int i = 0; i < m; ++i) {
    const double frac = m == 1 ? 1.0 : static_cast<double>(i) / (m - 1);
    cal.grid.push_back(lo * std::pow(hi / lo, frac));
  }
  cal.grid.back() = hi;
  return cal;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty set");
  if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("percentile level must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size()) - 1e-12));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

std::vector<CdfRow> build_cdf(std::span<const RateSet> sets) {
  std::vector<std::string> order;
  std::vector<std::vector<double>> pooled;
  for (const auto& set : sets) {
    auto it = std::find(order.begin(), order.end(), set.method);
    if (it == order.end()) {
      order.push_back(set.method);
      pooled.emplace_back();
      it = order.end() - 1;
    }
    auto& dst = pooled[static_cast<std::size_t>(it - order.begin())];
    dst.insert(dst.end(), set.rates_bps.begin(), set.rates_bps.end());
  }
  std::vector<CdfRow> rows;
  for (std::size_t m = 0; m < order.size(); ++m) {
    auto& v = pooled[m];
    std::sort(v.begin(), v.end());
    for (std::size_t i = 0; i < v.size(); ++i) {
      rows.push_back({order[m], v[i], static_cast<double>(i + 1) / static_cast<double>(v.size())});
    }
  }
  if (rows.empty()) throw InvalidArgument("no rates to build a CDF from");
  return rows;
}

void write_cdf_csv(const std::filesystem::path& path, std::span<const CdfRow> rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "method,rate_bps,cdf\n";
  for (const auto& r : rows) out << r.method << ',' << r.rate_bps << ',' << r.cdf << '\n';
}

RateSet load_rates(const std::filesystem::path& result_path) {
  const json j = read_json(result_path);
  RateSet set;
  try {
    set.method = j.at("method").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError("method", e.what());
  }
  try {
    set.rates_bps = j.at("rates_bps").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError("rates_bps", e.what());
  }
  if (set.rates_bps.empty()) throw ParseError("rates_bps", "no rates in " + result_path.string());
  return set;
}

}  // namespace hetnet
