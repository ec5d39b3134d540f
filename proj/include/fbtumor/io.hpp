#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbtumor/evolution.hpp"
#include "fbtumor/free_boundary.hpp"
#include "fbtumor/model_params.hpp"
#include "fbtumor/profile.hpp"
#include "fbtumor/stationary.hpp"

namespace fbtumor::io {

/**
 * @brief Deterministic decimal formatting: 17 significant digits.
 *
 * 17 digits round-trip every double exactly, and fixing the count (rather
 * than using shortest-form output) makes emitted files byte-identical across
 * platforms and library versions.
 */
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char esc[8];
          std::snprintf(esc, sizeof(esc), "\\u%04x", c);
          out += esc;
        } else {
          out += c;
        }
    }
  }
  return out;
}

/// JSON number token: finite values in full precision, non-finite as null.
inline std::string jnum(double v) {
  if (!std::isfinite(v)) return "null";
  return format_double(v);
}

inline std::string jstr(const std::string& s) { return "\"" + json_escape(s) + "\""; }

inline std::string jbool(bool b) { return b ? "true" : "false"; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Parameter schema
// ---------------------------------------------------------------------------

/**
 * @brief Parse one rate law from its JSON description.
 *
 * Consumption laws: {"kind": "linear", "lambda": x} or
 * {"kind": "michaelis_menten", "vmax": x, "k": x}. Proliferation laws:
 * {"kind": "linear", "mu": x, "sigma_tilde": x}. Anything else is a
 * malformed configuration.
 */
inline RateFunction rate_from_json(const nlohmann::json& j, bool consumption) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (consumption) {
      if (kind == "linear") return RateFunction::consumption_linear(j.at("lambda").get<double>());
      if (kind == "michaelis_menten")
        return RateFunction::consumption_michaelis_menten(j.at("vmax").get<double>(),
                                                          j.at("k").get<double>());
      throw DomainError("config: unknown consumption kind \"" + kind + "\"");
    }
    if (kind == "linear")
      return RateFunction::proliferation_linear(j.at("mu").get<double>(),
                                                j.at("sigma_tilde").get<double>());
    throw DomainError("config: unknown proliferation kind \"" + kind + "\"");
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config: malformed rate function: ") + e.what());
  }
}

/**
 * @brief Build ModelParams from a configuration document, filling absent
 *        fields from the given base.
 *
 * Schema: {"f": {...}, "g": {...}, "sigma_bar": x, "beta": x, "nu": x,
 * "sigma_D": x}. All keys optional; unknown keys rejected.
 */
inline ModelParams params_from_json(const nlohmann::json& j, const ModelParams& base) {
  ModelParams p = base;
  if (!j.is_object()) throw DomainError("config: top level must be a JSON object");
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k != "f" && k != "g" && k != "sigma_bar" && k != "beta" && k != "nu" && k != "sigma_D")
      throw DomainError("config: unknown key \"" + k + "\"");
  }
  try {
    if (j.contains("f")) p.f = rate_from_json(j.at("f"), true);
    if (j.contains("g")) p.g = rate_from_json(j.at("g"), false);
    if (j.contains("sigma_bar")) p.sigma_bar = j.at("sigma_bar").get<double>();
    if (j.contains("beta")) p.beta = j.at("beta").get<double>();
    if (j.contains("nu")) p.nu = j.at("nu").get<double>();
    if (j.contains("sigma_D")) p.sigma_D = j.at("sigma_D").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  return p;
}

/// Serialize one rate law under the parameter schema.
inline std::string rate_to_json(const RateFunction& r) {
  using detail::jnum;
  switch (r.kind()) {
    case RateFunction::Kind::LinearConsumption:
      return "{\"kind\":\"linear\",\"lambda\":" + jnum(r.param_a()) + "}";
    case RateFunction::Kind::MichaelisMenten:
      return "{\"kind\":\"michaelis_menten\",\"vmax\":" + jnum(r.param_a()) +
             ",\"k\":" + jnum(r.param_b()) + "}";
    case RateFunction::Kind::LinearProliferation:
      return "{\"kind\":\"linear\",\"mu\":" + jnum(r.param_a()) +
             ",\"sigma_tilde\":" + jnum(r.root()) + "}";
    default:
      return "{\"kind\":\"custom\"}";
  }
}

inline std::string params_to_json(const ModelParams& p) {
  using detail::jnum;
  return "{\"f\":" + rate_to_json(p.f) + ",\"g\":" + rate_to_json(p.g) +
         ",\"sigma_bar\":" + jnum(p.sigma_bar) + ",\"beta\":" + jnum(p.beta) +
         ",\"nu\":" + jnum(p.nu) + ",\"sigma_D\":" + jnum(p.sigma_D) + "}";
}

// ---------------------------------------------------------------------------
// Report and result serializers
// ---------------------------------------------------------------------------

inline std::string validation_report_json(const ValidationReport& rep) {
  using namespace detail;
  std::string s = "{\"all_passed\":" + jbool(rep.all_passed()) +
                  ",\"sigma_max\":" + jnum(rep.sigma_max) +
                  ",\"points\":" + std::to_string(rep.points) + ",\"checks\":[";
  for (std::size_t i = 0; i < rep.checks.size(); ++i) {
    const auto& c = rep.checks[i];
    if (i) s += ",";
    s += "{\"name\":" + jstr(c.name) + ",\"passed\":" + jbool(c.passed) +
         ",\"detail\":" + jstr(c.detail) + ",\"first_violation\":" +
         (c.first_violation ? jnum(*c.first_violation) : std::string("null")) + "}";
  }
  s += "],\"warnings\":[";
  for (std::size_t i = 0; i < rep.warnings.size(); ++i) {
    if (i) s += ",";
    s += jstr(rep.warnings[i]);
  }
  s += "]}";
  return s;
}

inline std::string profile_csv(const NutrientProfile& prof) {
  std::string s = "s,u,u_prime\n";
  for (std::size_t i = 0; i < prof.s.size(); ++i)
    s += format_double(prof.s[i]) + "," + format_double(prof.u[i]) + "," +
         format_double(prof.u_prime[i]) + "\n";
  return s;
}

inline std::string profile_sidecar_json(const NutrientProfile& prof) {
  using detail::jnum;
  return "{\"eta\":" + jnum(prof.eta) + ",\"R\":" + jnum(prof.R) +
         ",\"robin_residual\":" + jnum(prof.robin_residual) + ",\"tol\":" + jnum(prof.tol) + "}";
}

inline std::string profile_json(const NutrientProfile& prof) {
  using detail::jnum;
  std::string s = "{\"eta\":" + jnum(prof.eta) + ",\"R\":" + jnum(prof.R) +
                  ",\"robin_residual\":" + jnum(prof.robin_residual) +
                  ",\"tol\":" + jnum(prof.tol) + ",\"s\":[";
  for (std::size_t i = 0; i < prof.s.size(); ++i) s += (i ? "," : "") + jnum(prof.s[i]);
  s += "],\"u\":[";
  for (std::size_t i = 0; i < prof.u.size(); ++i) s += (i ? "," : "") + jnum(prof.u[i]);
  s += "],\"u_prime\":[";
  for (std::size_t i = 0; i < prof.u_prime.size(); ++i) s += (i ? "," : "") + jnum(prof.u_prime[i]);
  s += "]}";
  return s;
}

/// Physical profile of an assembled state: sigma(r) on a uniform 1025-point
/// grid over [0, R], dead core included.
inline std::string state_csv(const TumorState& st) {
  std::string s = "r,sigma\n";
  const int n = kProfileGridPoints;
  for (int i = 0; i < n; ++i) {
    const double r = st.R * double(i) / double(n - 1);
    s += format_double(r) + "," + format_double(st.sigma_at(r)) + "\n";
  }
  return s;
}

inline std::string state_json(const TumorState& st) {
  using detail::jnum;
  return "{\"R\":" + jnum(st.R) + ",\"phase\":" + detail::jstr(to_string(st.phase)) +
         ",\"eta\":" + jnum(st.eta) + ",\"rho\":" + jnum(st.rho) + "}";
}

inline std::string critical_radius_json(double R_c) {
  return "{\"R_c\":" + detail::jnum(R_c) + "}";
}

inline std::string thresholds_json(double sigma_tilde, double sigma_star_value,
                                   double R_c_at_sigma_star) {
  using detail::jnum;
  return "{\"sigma_tilde\":" + jnum(sigma_tilde) + ",\"sigma_star\":" + jnum(sigma_star_value) +
         ",\"R_c_at_sigma_star\":" + jnum(R_c_at_sigma_star) + "}";
}

inline std::string stationary_json(const StationaryResult& res) {
  using namespace detail;
  std::string s = "{\"exists\":" + jbool(res.exists);
  s += ",\"R_s\":" + (res.R_s ? jnum(*res.R_s) : std::string("null"));
  s += ",\"eta\":" + (res.state ? jnum(res.state->eta) : std::string("null"));
  s += ",\"rho\":" + (res.state ? jnum(res.state->rho) : std::string("null"));
  s += ",\"classification\":" + jstr(to_string(res.classification));
  s += ",\"sigma_tilde\":" + jnum(res.sigma_tilde);
  s += ",\"sigma_star\":" + jnum(res.sigma_star);
  if (!res.warning.empty()) s += ",\"warning\":" + jstr(res.warning);
  s += "}";
  return s;
}

inline std::string trajectory_csv(const Trajectory& traj) {
  std::string s = "t,R,phase\n";
  for (const auto& smp : traj.samples)
    s += format_double(smp.t) + "," + format_double(smp.R) + "," + to_string(smp.phase) + "\n";
  return s;
}

namespace detail {

inline std::string transitions_json(const Trajectory& traj) {
  std::string s = "[";
  for (std::size_t i = 0; i < traj.transitions.size(); ++i) {
    const auto& tr = traj.transitions[i];
    if (i) s += ",";
    s += "{\"T\":" + jnum(tr.T) + ",\"direction\":" + jstr(to_string(tr.direction)) + "}";
  }
  return s + "]";
}

inline std::string verdict_json(const Verdict& v) {
  std::string s = "{\"kind\":" + jstr(to_string(v.kind));
  if (v.R_s) s += ",\"R_s\":" + jnum(*v.R_s);
  return s + "}";
}

}  // namespace detail

inline std::string trajectory_sidecar_json(const Trajectory& traj) {
  using namespace detail;
  return "{\"verdict\":" + verdict_json(traj.verdict) +
         ",\"R_s\":" + (traj.R_s ? jnum(*traj.R_s) : std::string("null")) +
         ",\"transitions\":" + transitions_json(traj) + ",\"R0\":" + jnum(traj.R0) +
         ",\"t_end\":" + jnum(traj.t_end) + "}";
}

inline std::string trajectory_json(const Trajectory& traj) {
  using namespace detail;
  std::string s = "{\"verdict\":" + verdict_json(traj.verdict) +
                  ",\"R_s\":" + (traj.R_s ? jnum(*traj.R_s) : std::string("null")) +
                  ",\"R_c\":" + jnum(traj.R_c) + ",\"transitions\":" + transitions_json(traj) +
                  ",\"R0\":" + jnum(traj.R0) + ",\"t_end\":" + jnum(traj.t_end) +
                  ",\"samples\":[";
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& smp = traj.samples[i];
    if (i) s += ",";
    s += "{\"t\":" + jnum(smp.t) + ",\"R\":" + jnum(smp.R) +
         ",\"phase\":" + jstr(to_string(smp.phase)) + "}";
  }
  s += "]}";
  return s;
}

inline std::string fate_json(const FateResult& res) {
  using namespace detail;
  std::string s = "{\"verdict\":" + verdict_json(res.verdict);
  s += ",\"T_transition\":" + (res.T_transition ? jnum(*res.T_transition) : std::string("null"));
  s += ",\"t_end\":" + jnum(res.t_end);
  s += ",\"steps_used\":" + std::to_string(res.steps_used);
  if (!res.note.empty()) s += ",\"note\":" + jstr(res.note);
  s += "}";
  return s;
}

}  // namespace fbtumor::io
