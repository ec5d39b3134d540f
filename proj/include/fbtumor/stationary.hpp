#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "fbtumor/errors.hpp"
#include "fbtumor/free_boundary.hpp"
#include "fbtumor/model_params.hpp"
#include "fbtumor/numerics.hpp"
#include "fbtumor/profile.hpp"

namespace fbtumor {

enum class Classification { NoDormant, NonnecroticDormant, NecroticDormant };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::NoDormant: return "NoDormant";
    case Classification::NonnecroticDormant: return "NonnecroticDormant";
    default: return "NecroticDormant";
  }
}

/**
 * @brief Net volumetric growth rate G(R) of a tumor of radius R.
 *
 * Assembles the state at R and integrates g(u(s)) s^2 over the live region
 * [eta, 1] by composite Simpson on the profile's uniform grid, subtracting
 * the dissolution term nu * eta^3 / 3 of the dead core. For a nonnecrotic
 * state eta = 0 and the dissolution term vanishes. G is strictly decreasing
 * in R, tending to g(sigma_bar)/3 as R -> 0 and to -nu/3 as R -> infinity.
 */
inline double growth_functional(double R, const ModelParams& p,
                                double tol = kDefaultProfileTol) {
  const TumorState st = assemble_state(R, p, tol);
  const auto& s = st.profile.s;
  const auto& u = st.profile.u;
  std::vector<double> y(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) y[i] = p.g(std::max(u[i], 0.0)) * s[i] * s[i];
  const double h = (1.0 - st.eta) / static_cast<double>(s.size() - 1);
  const double live = num::simpson_uniform(y, h);
  return live - p.nu * st.eta * st.eta * st.eta / 3.0;
}

/**
 * @brief Radius R_s of the dormant (stationary) tumor, if one exists.
 *
 * A dormant state exists exactly when sigma_bar exceeds the proliferation
 * threshold sigma_tilde; below or at that threshold G < 0 everywhere and the
 * result is empty. Otherwise G has a single sign change, bracketed by
 * doubling from R = 1 and bisected to |G| <= tol.
 */
inline std::optional<double> stationary_radius(const ModelParams& p,
                                               double tol = kDefaultProfileTol) {
  ensure_valid(p);
  if (!(tol > 0.0)) throw DomainError("stationary_radius: tol must be positive");
  if (!(p.sigma_bar > p.g.root())) return std::nullopt;
  auto G = [&](double R) { return growth_functional(R, p, tol); };
  const num::Bracket br = num::bracket_decreasing(G, 1.0, 60, "stationary_radius");
  if (br.lo == br.hi) return br.lo;
  num::BisectOptions bo{tol, 1e-14 * std::max(1.0, br.hi), 1e3 * tol, 256};
  return num::bisect(G, br.lo, br.f_lo, br.hi, br.f_hi, bo, "stationary_radius").x;
}

/**
 * @brief Nutrient threshold separating nonnecrotic from necrotic dormancy.
 *
 * Scans the external concentration: for each trial sigma_bar the residual is
 * G evaluated at the critical radius of that configuration. The residual
 * rises strictly with sigma_bar, is negative just above sigma_tilde, and
 * turns positive for large sigma_bar; its unique zero is sigma_star. The
 * sigma_bar field of p is ignored. The scan stays above sigma_tilde, so the
 * dead-core threshold sigma_D (below sigma_tilde by assumption) never
 * catches up with the trial concentration.
 */
inline double sigma_star(const ModelParams& p, double tol = kDefaultProfileTol) {
  if (!(tol > 0.0)) throw DomainError("sigma_star: tol must be positive");
  const double st = p.g.root();
  auto resid = [&](double sb) {
    ModelParams q = p;
    q.sigma_bar = sb;
    const double Rc = critical_radius(q, tol);
    return growth_functional(Rc, q, tol);
  };
  const double lo = st * (1.0 + 1e-9);
  const double f_lo = resid(lo);
  if (f_lo >= 0.0) return lo;
  double hi = 2.0 * lo;
  double f_hi = resid(hi);
  int doublings = 0;
  while (f_hi <= 0.0) {
    if (++doublings > 60)
      throw ConvergenceError("sigma_star: no sign change found within 60 doublings");
    hi *= 2.0;
    f_hi = resid(hi);
  }
  // bisect() expects a decreasing residual; flip the sign of the increasing one.
  auto neg = [&](double sb) { return -resid(sb); };
  num::BisectOptions bo{tol, 1e-14 * hi, 1e3 * tol, 256};
  return num::bisect(neg, lo, -f_lo, hi, -f_hi, bo, "sigma_star").x;
}

/**
 * @brief Existence and structure of the dormant tumor for one configuration.
 */
struct StationaryResult {
  bool exists = false;
  std::optional<double> R_s;
  std::optional<TumorState> state;
  double sigma_tilde = 0.0;
  double sigma_star = 0.0;
  Classification classification = Classification::NoDormant;
  std::string warning;  // empty when none
};

/**
 * @brief Full dormant-state classification.
 *
 * Combines stationary_radius, sigma_star, and state assembly. The label
 * follows the phase of the assembled dormant state: a nonnecrotic dormant
 * state occurs for sigma_tilde < sigma_bar <= sigma_star (equivalently
 * R_s <= R_c), a necrotic one above sigma_star. When g(sigma_D) + nu is
 * nearly zero, G flattens on the necrotic branch and the root tolerance
 * dominates the accuracy of R_s; the result carries a warning then.
 */
inline StationaryResult classify(const ModelParams& p, double tol = kDefaultProfileTol) {
  ensure_valid(p);
  StationaryResult res;
  res.sigma_tilde = p.g.root();
  res.sigma_star = sigma_star(p, tol);
  const std::optional<double> Rs = stationary_radius(p, tol);
  if (Rs) {
    res.exists = true;
    res.R_s = *Rs;
    res.state = assemble_state(*Rs, p, tol);
    res.classification = res.state->phase == Phase::Nonnecrotic
                             ? Classification::NonnecroticDormant
                             : Classification::NecroticDormant;
  }
  if (std::abs(p.g(p.sigma_D) + p.nu) < 1e-6) {
    std::ostringstream os;
    os << "g(sigma_D) + nu = " << detail::fmt(p.g(p.sigma_D) + p.nu)
       << " is nearly zero: the growth rate is almost flat across the necrotic branch and "
       << "the root tolerance dominates the accuracy of R_s";
    res.warning = os.str();
  }
  return res;
}

}  // namespace fbtumor
