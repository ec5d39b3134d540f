#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "fbtumor/errors.hpp"

namespace fbtumor {

/**
 * @brief Nutrient-dependent rate law, either a consumption rate f or a net
 *        proliferation rate g.
 *
 * The solver assumes consumption rates vanish at zero concentration and are
 * strictly increasing with a bounded derivative, and proliferation rates are
 * nondecreasing with a single declared zero crossing (the concentration at
 * which gain and loss balance). Catalog kinds carry exact derivatives and
 * derivative bounds; custom callables declare their bound and fall back to a
 * guarded central difference when no derivative callable is supplied.
 */
class RateFunction {
 public:
  enum class Role { Consumption, Proliferation };
  enum class Kind { LinearConsumption, MichaelisMenten, LinearProliferation, Custom };

  using Fn = std::function<double(double)>;

  /// f(s) = lambda * s
  static RateFunction consumption_linear(double lambda) {
    RateFunction r(Role::Consumption, Kind::LinearConsumption);
    r.a_ = lambda;
    r.bound_ = lambda;
    return r;
  }

  /// f(s) = vmax * s / (k + s); derivative bound vmax / k attained at s = 0.
  static RateFunction consumption_michaelis_menten(double vmax, double k) {
    RateFunction r(Role::Consumption, Kind::MichaelisMenten);
    r.a_ = vmax;
    r.b_ = k;
    r.bound_ = vmax / k;
    return r;
  }

  /// g(s) = mu * (s - sigma_tilde); sigma_tilde is the balance concentration.
  static RateFunction proliferation_linear(double mu, double sigma_tilde) {
    RateFunction r(Role::Proliferation, Kind::LinearProliferation);
    r.a_ = mu;
    r.root_ = sigma_tilde;
    r.bound_ = mu;
    return r;
  }

  /// Custom consumption law. derivative_bound must dominate f' on [0, inf).
  static RateFunction custom_consumption(Fn value, Fn derivative, double derivative_bound) {
    RateFunction r(Role::Consumption, Kind::Custom);
    r.fn_ = std::move(value);
    r.dfn_ = std::move(derivative);
    r.bound_ = derivative_bound;
    return r;
  }

  /// Custom proliferation law with declared zero crossing sigma_tilde.
  static RateFunction custom_proliferation(Fn value, Fn derivative, double derivative_bound,
                                           double sigma_tilde) {
    RateFunction r(Role::Proliferation, Kind::Custom);
    r.fn_ = std::move(value);
    r.dfn_ = std::move(derivative);
    r.bound_ = derivative_bound;
    r.root_ = sigma_tilde;
    return r;
  }

  /// Rate at concentration s. Negative concentrations are outside the domain.
  double operator()(double s) const {
    require_nonnegative(s);
    switch (kind_) {
      case Kind::LinearConsumption:
        return a_ * s;
      case Kind::MichaelisMenten:
        return a_ * s / (b_ + s);
      case Kind::LinearProliferation:
        return a_ * (s - root_);
      case Kind::Custom:
        return fn_(s);
    }
    return 0.0;  // unreachable
  }

  /**
   * @brief Derivative of the rate at concentration s.
   *
   * Catalog kinds are exact. Custom kinds use the supplied derivative
   * callable, or a central difference with step h = max(1e-6, 1e-6*s),
   * clipped to nonnegative concentrations near s = 0.
   */
  double derivative(double s) const {
    require_nonnegative(s);
    switch (kind_) {
      case Kind::LinearConsumption:
        return a_;
      case Kind::MichaelisMenten: {
        const double d = b_ + s;
        return a_ * b_ / (d * d);
      }
      case Kind::LinearProliferation:
        return a_;
      case Kind::Custom:
        break;
    }
    if (dfn_) return dfn_(s);
    const double h = std::max(1e-6, 1e-6 * s);
    const double hi = s + h;
    const double lo = std::max(0.0, s - h);
    return (fn_(hi) - fn_(lo)) / (hi - lo);
  }

  Role role() const { return role_; }
  Kind kind() const { return kind_; }

  /// Declared (or exact) supremum of the derivative over [0, inf).
  double derivative_bound() const { return bound_; }

  /// Balance concentration of a proliferation rate (its unique zero).
  double root() const {
    if (role_ != Role::Proliferation)
      throw DomainError("RateFunction::root: only proliferation rates declare a zero crossing");
    return root_;
  }

  bool has_analytic_derivative() const { return kind_ != Kind::Custom || bool(dfn_); }

  // Kind parameters, exposed for serialization and reporting.
  double param_a() const { return a_; }
  double param_b() const { return b_; }

 private:
  RateFunction(Role role, Kind kind) : role_(role), kind_(kind) {}

  static void require_nonnegative(double s) {
    if (!(s >= 0.0))
      throw DomainError("RateFunction: concentration must be nonnegative, got " +
                        std::to_string(s));
  }

  Role role_;
  Kind kind_;
  double a_ = 0.0;
  double b_ = 0.0;
  double bound_ = 0.0;
  double root_ = std::numeric_limits<double>::quiet_NaN();
  Fn fn_;
  Fn dfn_;
};

}  // namespace fbtumor
