#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fbtumor/errors.hpp"
#include "fbtumor/rate_function.hpp"

namespace fbtumor {

/**
 * @brief Complete parameter set for the spherically symmetric tumor model.
 *
 * f is the nutrient consumption rate, g the net proliferation rate,
 * sigma_bar the external nutrient level delivered through the boundary,
 * beta the boundary transfer coefficient, nu the necrotic dissolution rate,
 * and sigma_D the concentration at which live tissue turns necrotic.
 *
 * The struct itself enforces nothing; solver entry points run the cheap
 * structural checks (ensure_valid) and validate_params produces the full
 * sampled report, so that invalid parameter sets can still be reported on.
 */
struct ModelParams {
  RateFunction f;
  RateFunction g;
  double sigma_bar = 1.0;
  double beta = 1.0;
  double nu = 1.0;
  double sigma_D = 0.5;
};

/// Sampling grid used by validate_params: uniform on [0, sigma_max].
struct SamplingGrid {
  double sigma_max = 0.0;  // <= 0 means "use 2 * sigma_bar"
  int points = 1001;
};

/// One assumption's verdict inside a ValidationReport.
struct AssumptionCheck {
  std::string name;     // "positivity", "consumption_monotone", ...
  bool passed = true;
  std::string detail;   // human-readable reason on failure, summary on pass
  std::optional<double> first_violation;  // sample concentration, when sampled
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  std::vector<std::string> warnings;
  double sigma_max = 0.0;  // effective grid actually used
  int points = 0;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/**
 * @brief Cheap structural validation run at every solver entry point.
 *
 * Checks positivity of the scalar parameters, the role of each rate law,
 * f(0) = 0, sigma_D below both the balance concentration and the external
 * level, and nonnegative net loss rate at the necrotic threshold
 * (g(sigma_D) + nu >= 0). Throws AssumptionError naming the failed check.
 * Sampled monotonicity checks are validate_params' job, not this one's.
 */
inline void ensure_valid(const ModelParams& p) {
  auto fail = [](const std::string& why) { throw AssumptionError("invalid model parameters: " + why); };

  if (!(p.sigma_bar > 0.0)) fail("sigma_bar must be positive, got " + detail::fmt(p.sigma_bar));
  if (!(p.beta > 0.0)) fail("beta must be positive, got " + detail::fmt(p.beta));
  if (!(p.nu > 0.0)) fail("nu must be positive, got " + detail::fmt(p.nu));
  if (!(p.sigma_D > 0.0)) fail("sigma_D must be positive, got " + detail::fmt(p.sigma_D));
  if (p.f.role() != RateFunction::Role::Consumption)
    fail("f must be a consumption rate");
  if (p.g.role() != RateFunction::Role::Proliferation)
    fail("g must be a proliferation rate");
  if (!(p.f.derivative_bound() > 0.0) || !std::isfinite(p.f.derivative_bound()))
    fail("f needs a positive finite derivative bound");
  const double f0 = p.f(0.0);
  if (!(std::abs(f0) <= 1e-12 * std::max(1.0, std::abs(p.f(p.sigma_bar)))))
    fail("f(0) must vanish, got " + detail::fmt(f0));
  const double st = p.g.root();
  if (!(st > 0.0)) fail("the proliferation balance concentration must be positive");
  if (!(p.sigma_D < st))
    fail("sigma_D = " + detail::fmt(p.sigma_D) +
         " must lie below the proliferation balance concentration " + detail::fmt(st));
  if (!(p.sigma_D < p.sigma_bar))
    fail("sigma_D = " + detail::fmt(p.sigma_D) + " must lie below sigma_bar = " +
         detail::fmt(p.sigma_bar));
  const double loss = p.g(p.sigma_D) + p.nu;
  if (!(loss >= 0.0))
    fail("g(sigma_D) + nu must be nonnegative, got " + detail::fmt(loss));
}

/**
 * @brief Full assumption audit. Always returns a report, never throws on
 *        invalid parameters.
 *
 * Catalog rate kinds are checked analytically (their derivatives are exact);
 * custom callables are sampled on the grid. The grid covers [0, sigma_max]
 * with sigma_max at least 2*sigma_bar and at least 1000 points; requests
 * below those floors are clamped and the effective grid is recorded in the
 * report. A custom proliferation rate whose derivative stays below
 * 1e-12 * its declared bound over more than 1% of the grid earns a plateau
 * warning: the balance concentration may be ill-determined there.
 */
inline ValidationReport validate_params(const ModelParams& p, SamplingGrid grid = {}) {
  ValidationReport rep;

  double sigma_max = grid.sigma_max;
  if (!(sigma_max >= 2.0 * p.sigma_bar)) sigma_max = 2.0 * p.sigma_bar;
  if (!(sigma_max > 0.0) || !std::isfinite(sigma_max)) sigma_max = 2.0;
  int n = std::max(grid.points, 1000);
  rep.sigma_max = sigma_max;
  rep.points = n;

  auto sample = [&](int i) { return sigma_max * double(i) / double(n - 1); };

  // positivity of the scalar parameters
  {
    AssumptionCheck c{"positivity", true, "sigma_bar, beta, nu, sigma_D all positive", {}};
    if (!(p.sigma_bar > 0.0)) { c.passed = false; c.detail = "sigma_bar = " + detail::fmt(p.sigma_bar) + " is not positive"; }
    else if (!(p.beta > 0.0)) { c.passed = false; c.detail = "beta = " + detail::fmt(p.beta) + " is not positive"; }
    else if (!(p.nu > 0.0)) { c.passed = false; c.detail = "nu = " + detail::fmt(p.nu) + " is not positive"; }
    else if (!(p.sigma_D > 0.0)) { c.passed = false; c.detail = "sigma_D = " + detail::fmt(p.sigma_D) + " is not positive"; }
    rep.checks.push_back(std::move(c));
  }

  // A1: consumption law. Vanishes at 0, strictly increasing, derivative
  // bounded by the declared supremum.
  {
    AssumptionCheck c{"consumption_monotone", true, "", {}};
    const double M = p.f.derivative_bound();
    if (p.f.role() != RateFunction::Role::Consumption) {
      c.passed = false;
      c.detail = "f does not have the consumption role";
    } else if (!(M > 0.0) || !std::isfinite(M)) {
      c.passed = false;
      c.detail = "f's derivative bound must be positive and finite, got " + detail::fmt(M);
    } else {
      switch (p.f.kind()) {
        case RateFunction::Kind::LinearConsumption:
          if (!(p.f.param_a() > 0.0)) {
            c.passed = false;
            c.detail = "linear consumption rate lambda = " + detail::fmt(p.f.param_a()) +
                       " is not positive";
          } else {
            c.detail = "linear consumption: f(0) = 0 and f' = lambda exactly";
          }
          break;
        case RateFunction::Kind::MichaelisMenten:
          if (!(p.f.param_a() > 0.0) || !(p.f.param_b() > 0.0)) {
            c.passed = false;
            c.detail = "Michaelis-Menten requires vmax > 0 and k > 0, got vmax = " +
                       detail::fmt(p.f.param_a()) + ", k = " + detail::fmt(p.f.param_b());
          } else {
            c.detail = "Michaelis-Menten: f(0) = 0, f' in (0, vmax/k] exactly";
          }
          break;
        default: {  // custom: sample
          c.detail = "custom consumption sampled on the grid";
          double f0 = 0.0;
          bool f0_ok = true;
          try {
            f0 = p.f(0.0);
          } catch (const std::exception&) {
            f0_ok = false;
          }
          if (!f0_ok || !(std::abs(f0) <= 1e-10 * std::max(1.0, M * sigma_max))) {
            c.passed = false;
            c.detail = "custom consumption does not vanish at 0 (f(0) = " + detail::fmt(f0) + ")";
            c.first_violation = 0.0;
            break;
          }
          for (int i = 0; i < n; ++i) {
            const double s = sample(i);
            const double d = p.f.derivative(s);
            if (!(d > 0.0)) {
              c.passed = false;
              c.detail = "custom consumption derivative is not positive at s = " + detail::fmt(s) +
                         " (f' = " + detail::fmt(d) + ")";
              c.first_violation = s;
              break;
            }
            if (!(d <= M * (1.0 + 1e-9))) {
              c.passed = false;
              c.detail = "custom consumption derivative exceeds its declared bound at s = " +
                         detail::fmt(s) + " (f' = " + detail::fmt(d) + " > " + detail::fmt(M) + ")";
              c.first_violation = s;
              break;
            }
          }
        }
      }
    }
    rep.checks.push_back(std::move(c));
  }

  // A2: proliferation law. Nondecreasing, not flat, vanishing at its
  // declared balance concentration.
  {
    AssumptionCheck c{"proliferation_monotone", true, "", {}};
    if (p.g.role() != RateFunction::Role::Proliferation) {
      c.passed = false;
      c.detail = "g does not have the proliferation role";
    } else {
      const double st = p.g.root();
      if (!(st > 0.0) || !std::isfinite(st)) {
        c.passed = false;
        c.detail = "balance concentration sigma_tilde = " + detail::fmt(st) + " is not positive";
      } else if (p.g.kind() == RateFunction::Kind::LinearProliferation) {
        if (!(p.g.param_a() > 0.0)) {
          c.passed = false;
          c.detail = "linear proliferation slope mu = " + detail::fmt(p.g.param_a()) +
                     " is not positive";
        } else {
          c.detail = "linear proliferation: g(sigma_tilde) = 0 and g' = mu exactly";
        }
      } else {  // custom: sample
        c.detail = "custom proliferation sampled on the grid";
        const double scale = std::max(1.0, std::abs(p.g(sigma_max)));
        const double gst = p.g(std::min(st, sigma_max));
        if (st <= sigma_max && !(std::abs(gst) <= 1e-9 * scale)) {
          c.passed = false;
          c.detail = "custom proliferation does not vanish at its declared balance "
                     "concentration (g(" + detail::fmt(st) + ") = " + detail::fmt(gst) + ")";
          c.first_violation = st;
        } else {
          int flat = 0;
          const double gbound = std::max(p.g.derivative_bound(), 1.0);
          for (int i = 0; i < n; ++i) {
            const double s = sample(i);
            const double d = p.g.derivative(s);
            if (!(d >= -1e-9 * gbound)) {
              c.passed = false;
              c.detail = "custom proliferation derivative is negative at s = " + detail::fmt(s) +
                         " (g' = " + detail::fmt(d) + ")";
              c.first_violation = s;
              break;
            }
            if (d <= 1e-12 * gbound) ++flat;
          }
          if (c.passed && flat > n / 100) {
            rep.warnings.push_back(
                "proliferation rate is flat over more than 1% of the sampled range; "
                "the balance concentration may be ill-determined");
          }
        }
      }
    }
    rep.checks.push_back(std::move(c));
  }

  // A3: necrotic threshold below both reference concentrations, and
  // dissolution at least as fast as proliferation loss at the threshold.
  {
    AssumptionCheck c{"threshold_order", true, "sigma_D below min(sigma_tilde, sigma_bar) and g(sigma_D) + nu >= 0", {}};
    double st = std::numeric_limits<double>::quiet_NaN();
    if (p.g.role() == RateFunction::Role::Proliferation) st = p.g.root();
    if (!(p.sigma_D < st)) {
      c.passed = false;
      c.detail = "sigma_D = " + detail::fmt(p.sigma_D) +
                 " is not below the balance concentration " + detail::fmt(st);
      c.first_violation = p.sigma_D;
    } else if (!(p.sigma_D < p.sigma_bar)) {
      c.passed = false;
      c.detail = "sigma_D = " + detail::fmt(p.sigma_D) + " is not below sigma_bar = " +
                 detail::fmt(p.sigma_bar);
      c.first_violation = p.sigma_D;
    } else {
      double loss = std::numeric_limits<double>::quiet_NaN();
      try {
        loss = p.g(p.sigma_D) + p.nu;
      } catch (const std::exception&) {
      }
      if (!(loss >= 0.0)) {
        c.passed = false;
        c.detail = "g(sigma_D) + nu = " + detail::fmt(loss) + " is negative";
        c.first_violation = p.sigma_D;
      }
    }
    rep.checks.push_back(std::move(c));
  }

  return rep;
}

}  // namespace fbtumor
