#pragma once

#include <cmath>
#include <sstream>
#include <utility>

#include "fbtumor/errors.hpp"
#include "fbtumor/model_params.hpp"
#include "fbtumor/numerics.hpp"
#include "fbtumor/profile.hpp"

namespace fbtumor {

enum class Phase { Nonnecrotic, Necrotic };

inline const char* to_string(Phase p) {
  return p == Phase::Nonnecrotic ? "nonnecrotic" : "necrotic";
}

/**
 * @brief Full radial state of a tumor of outer radius R.
 *
 * Nonnecrotic states carry the live profile over the whole ball (eta = 0,
 * rho = 0). Necrotic states hold the dead-core concentration sigma_D on
 * [0, rho] and the live profile on [rho, R], with rho = eta * R. The switch
 * between the two regimes is structural: which branch applies is decided
 * once per state, never per sample point.
 */
struct TumorState {
  double R = 0.0;
  Phase phase = Phase::Nonnecrotic;
  double eta = 0.0;  // rescaled necrotic interface, 0 when nonnecrotic
  double rho = 0.0;  // physical necrotic radius, eta * R
  NutrientProfile profile;
  double sigma_D = 0.0;

  /// Concentration at physical radius r in [0, R].
  double sigma_at(double r) const {
    if (!(r >= 0.0 && r <= R * (1.0 + 1e-12)))
      throw DomainError("TumorState::sigma_at: r must lie in [0, R]");
    if (phase == Phase::Necrotic && r <= rho) return sigma_D;
    return profile.value_at(std::min(r / R, 1.0));
  }
};

namespace detail {

/// Center-value residual F(eta, R) = u(eta) - sigma_D with its certified
/// uncertainty. Valid for sign queries even when the profile itself is not
/// resolvable at this tolerance (robin_ok false): the shooting bracket always
/// pins the center value to halfwidth.
struct CenterResidual {
  double F = 0.0;
  double halfwidth = 0.0;
};

inline CenterResidual center_residual(double eta, double R, const ModelParams& p, double tol) {
  const ShootResult sh = center_estimate(eta, R, p, tol);
  return {sh.a - p.sigma_D, sh.halfwidth};
}

/// Necrotic interface for a radius already known to satisfy F(0, R) < -tol.
inline double necrotic_fraction_bracketed(double R, const ModelParams& p, double tol,
                                          double F0) {
  const double eta_hi = 1.0 - 1e-6;
  const double F_hi = center_residual(eta_hi, R, p, tol).F;
  if (!(F_hi > 0.0)) {
    std::ostringstream os;
    os << "necrotic_fraction: no sign change in the interface residual up to eta = " << eta_hi
       << " at R = " << R;
    throw ConvergenceError(os.str());
  }
  auto residual = [&](double eta) { return center_residual(eta, R, p, tol).F; };
  num::BisectOptions bo{tol, 1e-14, 1e3 * tol, 256};
  return num::bisect(residual, 0.0, F0, eta_hi, F_hi, bo, "necrotic_fraction").x;
}

}  // namespace detail

/**
 * @brief Critical radius R_c at which the center concentration of a fully
 *        live tumor reaches the necrotic threshold sigma_D.
 *
 * The center value u(0) decreases strictly with R, from sigma_bar toward 0,
 * so the residual u(0) - sigma_D has exactly one root. Brackets by doubling
 * from R = 1, then bisects to |residual| <= tol.
 */
inline double critical_radius(const ModelParams& p, double tol = kDefaultProfileTol) {
  ensure_valid(p);
  if (!(tol > 0.0)) throw DomainError("critical_radius: tol must be positive");
  auto residual = [&](double R) { return detail::center_residual(0.0, R, p, tol).F; };
  const num::Bracket br = num::bracket_decreasing(residual, 1.0, 60, "critical_radius");
  if (br.lo == br.hi) return br.lo;
  num::BisectOptions bo{tol, 1e-14 * std::max(1.0, br.hi), 1e3 * tol, 256};
  return num::bisect(residual, br.lo, br.f_lo, br.hi, br.f_hi, bo, "critical_radius").x;
}

/**
 * @brief Rescaled necrotic interface eta(R) for a radius at or above R_c.
 *
 * Solves u(eta) = sigma_D in eta by bisection on [0, 1 - 1e-6]; the residual
 * rises strictly with eta from F(0, R) <= 0 toward sigma_bar - sigma_D > 0.
 * A center residual already within tol of zero means R sits at the critical
 * radius within solver resolution and the interface is 0. A residual above
 * tol means R < R_c: no necrotic core exists and the request is a domain
 * error.
 */
inline double necrotic_fraction(double R, const ModelParams& p, double tol = kDefaultProfileTol) {
  ensure_valid(p);
  if (!(R > 0.0) || !std::isfinite(R))
    throw DomainError("necrotic_fraction: R must be positive and finite");
  if (!(tol > 0.0)) throw DomainError("necrotic_fraction: tol must be positive");
  const double F0 = detail::center_residual(0.0, R, p, tol).F;
  if (std::abs(F0) <= tol) return 0.0;
  if (F0 > 0.0) {
    std::ostringstream os;
    os << "necrotic_fraction: R = " << R << " is below the critical radius (center exceeds "
       << "sigma_D by " << F0 << "); no necrotic core exists";
    throw DomainError(os.str());
  }
  return detail::necrotic_fraction_bracketed(R, p, tol, F0);
}

/**
 * @brief Outer radius R whose necrotic interface sits at the given eta.
 *
 * Inverse of necrotic_fraction: for fixed eta the center value u(eta)
 * decreases strictly in R, so u(eta) = sigma_D has one root, bracketed by
 * doubling from R = 1.
 */
inline double radius_for_fraction(double eta, const ModelParams& p,
                                  double tol = kDefaultProfileTol) {
  ensure_valid(p);
  if (!(eta >= 0.0 && eta < 1.0))
    throw DomainError("radius_for_fraction: eta must lie in [0, 1)");
  if (!(tol > 0.0)) throw DomainError("radius_for_fraction: tol must be positive");
  auto residual = [&](double R) { return detail::center_residual(eta, R, p, tol).F; };
  const num::Bracket br = num::bracket_decreasing(residual, 1.0, 60, "radius_for_fraction");
  if (br.lo == br.hi) return br.lo;
  num::BisectOptions bo{tol, 1e-14 * std::max(1.0, br.hi), 1e3 * tol, 256};
  return num::bisect(residual, br.lo, br.f_lo, br.hi, br.f_hi, bo, "radius_for_fraction").x;
}

/**
 * @brief Assemble the tumor state at outer radius R.
 *
 * Phase detection is a single center-value query: a fully live profile whose
 * center stays at or above sigma_D (within tol) is the nonnecrotic state;
 * below that, the necrotic interface is solved for and the live profile is
 * rebuilt on [eta, 1]. A radius exactly at R_c therefore lands on the
 * nonnecrotic branch with center value sigma_D, and the two branches agree
 * there to solver resolution.
 */
inline TumorState assemble_state(double R, const ModelParams& p,
                                 double tol = kDefaultProfileTol) {
  ensure_valid(p);
  if (!(R > 0.0) || !std::isfinite(R))
    throw DomainError("assemble_state: R must be positive and finite");
  if (!(tol > 0.0)) throw DomainError("assemble_state: tol must be positive");

  TumorState st;
  st.R = R;
  st.sigma_D = p.sigma_D;

  const double F0 = detail::center_residual(0.0, R, p, tol).F;
  if (F0 >= -tol) {
    st.phase = Phase::Nonnecrotic;
    st.eta = 0.0;
    st.rho = 0.0;
    st.profile = solve_profile(0.0, R, p, tol);
    return st;
  }
  st.phase = Phase::Necrotic;
  st.eta = detail::necrotic_fraction_bracketed(R, p, tol, F0);
  st.rho = st.eta * R;
  st.profile = solve_profile(st.eta, R, p, tol);
  return st;
}

}  // namespace fbtumor
