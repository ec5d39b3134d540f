#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fbtumor/errors.hpp"
#include "fbtumor/evolution.hpp"
#include "fbtumor/free_boundary.hpp"
#include "fbtumor/io.hpp"
#include "fbtumor/model_params.hpp"
#include "fbtumor/profile.hpp"
#include "fbtumor/stationary.hpp"

namespace fbtumor::cli {

// Exit codes: 0 success, 1 unexpected failure, 2 malformed configuration or
// request, 3 solver did not converge, 4 parameter assumptions violated.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitBadParams = 4;

/**
 * @brief One fully parsed invocation.
 *
 * Parameter fields are optional overrides: values present here win over the
 * config file, which wins over the built-in defaults (linear rates with unit
 * coefficients, sigma_bar = beta = nu = 1, sigma_D = 0.5, g balancing at 1).
 */
struct RunConfig {
  std::string command;  // validate|profile|critical-radius|stationary|thresholds|evolve|fate|sweep

  std::optional<std::string> config_path;

  // scalar overrides
  std::optional<double> sigma_bar, beta, nu, sigma_D;
  // rate-law overrides
  std::optional<std::string> f_kind;  // "linear" | "michaelis_menten"
  std::optional<double> f_lambda, f_vmax, f_k;
  std::optional<std::string> g_kind;  // "linear"
  std::optional<double> g_mu, g_sigma_tilde;

  // command-specific options
  std::optional<double> R;      // profile
  double eta = 0.0;             // profile
  bool physical = false;        // profile: emit sigma(r) of the assembled state
  std::optional<double> R0;     // evolve, fate, sweep over fate
  std::optional<double> t_end;  // evolve
  double tol = 1e-8;
  double convergence_eps = 1e-6;
  long long max_steps = 1'000'000;

  // sweep
  std::string axis;           // sigma_bar | beta | nu | R0
  std::optional<double> from, to;
  int count = 0;
  std::string sweep_command;  // stationary | critical-radius | fate

  // output
  std::optional<std::string> out_path;
  std::string format;  // "" = command default, else "csv" | "json"
};

namespace detail {

inline ModelParams default_params() {
  return ModelParams{RateFunction::consumption_linear(1.0),
                     RateFunction::proliferation_linear(1.0, 1.0),
                     1.0, 1.0, 1.0, 0.5};
}

/// Defaults, overlaid by the config file, overlaid by the flags.
inline ModelParams build_params(const RunConfig& cfg) {
  ModelParams p = default_params();
  if (cfg.config_path) {
    std::ifstream in(*cfg.config_path);
    if (!in) throw DomainError("config: cannot open \"" + *cfg.config_path + "\"");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(std::string("config: invalid JSON: ") + e.what());
    }
    p = io::params_from_json(j, p);
  }
  if (cfg.sigma_bar) p.sigma_bar = *cfg.sigma_bar;
  if (cfg.beta) p.beta = *cfg.beta;
  if (cfg.nu) p.nu = *cfg.nu;
  if (cfg.sigma_D) p.sigma_D = *cfg.sigma_D;

  if (cfg.f_kind || cfg.f_lambda || cfg.f_vmax || cfg.f_k) {
    const bool was_linear = p.f.kind() == RateFunction::Kind::LinearConsumption;
    const bool was_mm = p.f.kind() == RateFunction::Kind::MichaelisMenten;
    std::string kind = cfg.f_kind.value_or(was_mm ? "michaelis_menten" : "linear");
    if (kind == "linear") {
      p.f = RateFunction::consumption_linear(
          cfg.f_lambda.value_or(was_linear ? p.f.param_a() : 1.0));
    } else if (kind == "michaelis_menten") {
      p.f = RateFunction::consumption_michaelis_menten(
          cfg.f_vmax.value_or(was_mm ? p.f.param_a() : 1.0),
          cfg.f_k.value_or(was_mm ? p.f.param_b() : 1.0));
    } else {
      throw DomainError("config: unknown consumption kind \"" + kind + "\"");
    }
  }
  if (cfg.g_kind || cfg.g_mu || cfg.g_sigma_tilde) {
    const std::string kind = cfg.g_kind.value_or("linear");
    if (kind != "linear") throw DomainError("config: unknown proliferation kind \"" + kind + "\"");
    const bool was_linear = p.g.kind() == RateFunction::Kind::LinearProliferation;
    p.g = RateFunction::proliferation_linear(
        cfg.g_mu.value_or(was_linear ? p.g.param_a() : 1.0),
        cfg.g_sigma_tilde.value_or(was_linear ? p.g.root() : 1.0));
  }
  return p;
}

/// Companion path for a sidecar: "traj.csv" -> "traj.json", else append.
inline std::string sidecar_path(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
    return path.substr(0, path.size() - 4) + ".json";
  return path + ".json";
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("output: cannot open \"" + path + "\" for writing");
  out << content;
  if (!out) throw DomainError("output: write to \"" + path + "\" failed");
}

/// Emit a primary document, to the output file when one is configured and to
/// the stream otherwise.
inline void emit(const RunConfig& cfg, std::ostream& out, const std::string& content) {
  if (cfg.out_path)
    write_file(*cfg.out_path, content);
  else
    out << content << (content.empty() || content.back() == '\n' ? "" : "\n");
}

/// Emit a CSV with a JSON sidecar. Without an output path both land on the
/// stream, CSV first, then a blank line and the sidecar.
inline void emit_with_sidecar(const RunConfig& cfg, std::ostream& out, const std::string& csv,
                              const std::string& sidecar) {
  if (cfg.out_path) {
    write_file(*cfg.out_path, csv);
    write_file(sidecar_path(*cfg.out_path), sidecar + "\n");
  } else {
    out << csv << "\n" << sidecar << "\n";
  }
}

inline const std::string& pick_format(const RunConfig& cfg, const std::string& def) {
  static const std::string csv = "csv", json = "json";
  if (cfg.format.empty()) return def == "csv" ? csv : json;
  if (cfg.format != "csv" && cfg.format != "json")
    throw DomainError("config: unknown format \"" + cfg.format + "\"");
  return cfg.format == "csv" ? csv : json;
}

inline double require(const std::optional<double>& v, const char* what) {
  if (!v) throw DomainError(std::string("config: missing required option ") + what);
  return *v;
}

// --- sweep ------------------------------------------------------------------

inline int pool_size(int jobs) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("FBTUMOR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1 && v <= 1024) n = static_cast<unsigned>(v);
  }
  if (jobs < 1) jobs = 1;
  return static_cast<int>(n) < jobs ? static_cast<int>(n) : jobs;
}

struct SweepPlan {
  std::string axis;
  std::vector<double> values;
  std::string header;  // columns after the axis column
};

inline SweepPlan sweep_plan(const RunConfig& cfg) {
  SweepPlan plan;
  plan.axis = cfg.axis;
  if (plan.axis != "sigma_bar" && plan.axis != "beta" && plan.axis != "nu" && plan.axis != "R0")
    throw DomainError("config: sweep axis must be one of sigma_bar, beta, nu, R0");
  if (cfg.sweep_command != "stationary" && cfg.sweep_command != "critical-radius" &&
      cfg.sweep_command != "fate")
    throw DomainError("config: sweep --command must be stationary, critical-radius, or fate");
  if (plan.axis == "R0" && cfg.sweep_command != "fate")
    throw DomainError("config: the R0 axis only applies to --command fate");
  const double from = require(cfg.from, "--from");
  const double to = require(cfg.to, "--to");
  if (cfg.count < 1) throw DomainError("config: sweep --count must be at least 1");
  if (!(from > 0.0) || !(to >= from))
    throw DomainError("config: sweep range must be positive and ordered");
  plan.values.resize(cfg.count);
  for (int i = 0; i < cfg.count; ++i)
    plan.values[i] =
        cfg.count == 1 ? from : from + (to - from) * double(i) / double(cfg.count - 1);
  if (cfg.sweep_command == "stationary")
    plan.header = "exists,R_s,classification";
  else if (cfg.sweep_command == "critical-radius")
    plan.header = "R_c";
  else
    plan.header = "verdict,T_transition";
  return plan;
}

/// One grid point of a sweep, as the CSV cells after the axis value.
inline std::string sweep_row(const RunConfig& cfg, const ModelParams& base, double value) {
  ModelParams p = base;
  double R0 = cfg.R0.value_or(1.0);
  if (cfg.axis == "sigma_bar") p.sigma_bar = value;
  else if (cfg.axis == "beta") p.beta = value;
  else if (cfg.axis == "nu") p.nu = value;
  else R0 = value;

  if (cfg.sweep_command == "critical-radius")
    return io::format_double(critical_radius(p, cfg.tol));

  if (cfg.sweep_command == "stationary") {
    const std::optional<double> Rs = stationary_radius(p, cfg.tol);
    if (!Rs) return "false,," + std::string(to_string(Classification::NoDormant));
    const TumorState st = assemble_state(*Rs, p, cfg.tol);
    const Classification cls = st.phase == Phase::Nonnecrotic
                                   ? Classification::NonnecroticDormant
                                   : Classification::NecroticDormant;
    return "true," + io::format_double(*Rs) + "," + to_string(cls);
  }

  EvolveOptions opts{cfg.tol, cfg.max_steps, cfg.convergence_eps};
  const FateResult res = fate(R0, p, opts);
  return std::string(to_string(res.verdict.kind)) + "," +
         (res.T_transition ? io::format_double(*res.T_transition) : "");
}

inline std::string run_sweep(const RunConfig& cfg, const ModelParams& base) {
  const SweepPlan plan = sweep_plan(cfg);
  const int n = static_cast<int>(plan.values.size());
  std::vector<std::string> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        rows[i] = sweep_row(cfg, base, plan.values[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = pool_size(n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (int i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  if (pick_format(cfg, "csv") == "json") {
    std::string s = "{\"axis\":\"" + plan.axis + "\",\"columns\":\"" + plan.header +
                    "\",\"rows\":[";
    for (int i = 0; i < n; ++i) {
      if (i) s += ",";
      s += "[" + io::format_double(plan.values[i]);
      std::vector<std::string> cells;
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = rows[i].find(',', start);
        cells.push_back(rows[i].substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      for (const std::string& cell : cells) {
        if (cell.empty())
          s += ",null";
        else if (cell == "true" || cell == "false" ||
                 (cell[0] >= '0' && cell[0] <= '9') || cell[0] == '-' || cell[0] == '+')
          s += "," + cell;
        else
          s += ",\"" + cell + "\"";
      }
      s += "]";
    }
    return s + "]}";
  }
  std::string csv = plan.axis + "," + plan.header + "\n";
  for (int i = 0; i < n; ++i) csv += io::format_double(plan.values[i]) + "," + rows[i] + "\n";
  return csv;
}

}  // namespace detail

/**
 * @brief Execute one parsed invocation, writing results to the configured
 *        output path or to `out`, and diagnostics to `err`.
 *
 * Returns a process exit code: 0 on success, 2 for malformed configuration
 * or requests outside an operation's domain, 3 when a solver failed to
 * converge (or detected an internal inconsistency), 4 when the parameter set
 * violates the model assumptions, 1 for anything unexpected.
 */
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const ModelParams p = detail::build_params(cfg);
    const std::string& cmd = cfg.command;

    if (cmd == "validate") {
      const ValidationReport rep = validate_params(p);
      detail::emit(cfg, out, io::validation_report_json(rep));
      return rep.all_passed() ? kExitOk : kExitBadParams;
    }

    if (cmd == "profile") {
      const double R = detail::require(cfg.R, "--R");
      if (cfg.physical) {
        const TumorState st = assemble_state(R, p, cfg.tol);
        if (detail::pick_format(cfg, "csv") == "json")
          detail::emit(cfg, out, io::state_json(st));
        else
          detail::emit_with_sidecar(cfg, out, io::state_csv(st), io::state_json(st));
        return kExitOk;
      }
      const NutrientProfile prof = solve_profile(cfg.eta, R, p, cfg.tol);
      if (detail::pick_format(cfg, "csv") == "json")
        detail::emit(cfg, out, io::profile_json(prof));
      else
        detail::emit_with_sidecar(cfg, out, io::profile_csv(prof),
                                  io::profile_sidecar_json(prof));
      return kExitOk;
    }

    if (cmd == "critical-radius") {
      const double R_c = critical_radius(p, cfg.tol);
      if (detail::pick_format(cfg, "json") == "csv")
        detail::emit(cfg, out, "R_c\n" + io::format_double(R_c) + "\n");
      else
        detail::emit(cfg, out, io::critical_radius_json(R_c));
      return kExitOk;
    }

    if (cmd == "stationary") {
      const StationaryResult res = classify(p, cfg.tol);
      if (detail::pick_format(cfg, "json") == "csv") {
        std::string csv = "exists,R_s,eta,rho,classification\n";
        csv += res.exists ? "true" : "false";
        csv += "," + (res.R_s ? io::format_double(*res.R_s) : "");
        csv += "," + (res.state ? io::format_double(res.state->eta) : "");
        csv += "," + (res.state ? io::format_double(res.state->rho) : "");
        csv += "," + std::string(to_string(res.classification)) + "\n";
        detail::emit(cfg, out, csv);
      } else {
        detail::emit(cfg, out, io::stationary_json(res));
      }
      return kExitOk;
    }

    if (cmd == "thresholds") {
      const double st = p.g.root();
      const double ss = sigma_star(p, cfg.tol);
      ModelParams q = p;
      q.sigma_bar = ss;
      const double R_c_star = critical_radius(q, cfg.tol);
      if (detail::pick_format(cfg, "json") == "csv")
        detail::emit(cfg, out,
                     "sigma_tilde,sigma_star,R_c_at_sigma_star\n" + io::format_double(st) + "," +
                         io::format_double(ss) + "," + io::format_double(R_c_star) + "\n");
      else
        detail::emit(cfg, out, io::thresholds_json(st, ss, R_c_star));
      return kExitOk;
    }

    if (cmd == "evolve") {
      const double R0 = detail::require(cfg.R0, "--R0");
      const double t_end = detail::require(cfg.t_end, "--t-end");
      const EvolveOptions opts{cfg.tol, cfg.max_steps, cfg.convergence_eps};
      const Trajectory traj = evolve(R0, t_end, p, opts);
      if (detail::pick_format(cfg, "csv") == "json")
        detail::emit(cfg, out, io::trajectory_json(traj));
      else
        detail::emit_with_sidecar(cfg, out, io::trajectory_csv(traj),
                                  io::trajectory_sidecar_json(traj));
      return kExitOk;
    }

    if (cmd == "fate") {
      const double R0 = detail::require(cfg.R0, "--R0");
      const EvolveOptions opts{cfg.tol, cfg.max_steps, cfg.convergence_eps};
      const FateResult res = fate(R0, p, opts);
      if (detail::pick_format(cfg, "json") == "csv")
        detail::emit(cfg, out,
                     "verdict,T_transition\n" + std::string(to_string(res.verdict.kind)) + "," +
                         (res.T_transition ? io::format_double(*res.T_transition) : "") + "\n");
      else
        detail::emit(cfg, out, io::fate_json(res));
      return kExitOk;
    }

    if (cmd == "sweep") {
      detail::emit(cfg, out, detail::run_sweep(cfg, p));
      return kExitOk;
    }

    err << "error: unknown command \"" << cmd << "\"\n";
    return kExitBadConfig;
  } catch (const AssumptionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadParams;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const ConsistencyError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace fbtumor::cli
