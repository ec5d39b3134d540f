#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fbtumor/errors.hpp"
#include "fbtumor/model_params.hpp"
#include "fbtumor/numerics.hpp"
#include "fbtumor/ode.hpp"
#include "fbtumor/rate_function.hpp"

using namespace fbtumor;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ModelParams catalog_defaults() {
  return ModelParams{RateFunction::consumption_linear(1.0),
                     RateFunction::proliferation_linear(1.0, 1.0),
                     1.0, 1.0, 1.0, 0.5};
}

}  // namespace

// ---------------------------------------------------------------------------
// rate functions
// ---------------------------------------------------------------------------

TEST_CASE("linear consumption evaluates lambda * s with exact derivative") {
  const RateFunction f = RateFunction::consumption_linear(2.5);
  CHECK(f.role() == RateFunction::Role::Consumption);
  CHECK(f.kind() == RateFunction::Kind::LinearConsumption);
  CHECK(f(0.0) == 0.0);
  CHECK_THAT(f(1.3), WithinRel(3.25, 1e-15));
  CHECK(f.derivative(7.0) == 2.5);
  CHECK(f.derivative_bound() == 2.5);
  CHECK(f.has_analytic_derivative());
  CHECK(f.param_a() == 2.5);
}

TEST_CASE("saturating consumption matches vmax s / (k + s)") {
  const RateFunction f = RateFunction::consumption_michaelis_menten(2.0, 0.5);
  CHECK_THAT(f(1.0), WithinRel(2.0 / 1.5, 1e-15));
  // derivative vmax k / (k + s)^2, maximal at s = 0
  CHECK_THAT(f.derivative(1.0), WithinRel(1.0 / 2.25, 1e-15));
  CHECK_THAT(f.derivative_bound(), WithinRel(4.0, 1e-15));
  CHECK(f(0.0) == 0.0);
}

TEST_CASE("linear proliferation crosses zero at its declared balance point") {
  const RateFunction g = RateFunction::proliferation_linear(2.0, 0.75);
  CHECK(g.role() == RateFunction::Role::Proliferation);
  CHECK_THAT(g(0.75), WithinAbs(0.0, 1e-15));
  CHECK_THAT(g(1.75), WithinRel(2.0, 1e-15));
  CHECK(g.root() == 0.75);
  CHECK(g.derivative(0.3) == 2.0);
}

TEST_CASE("rates reject negative concentrations") {
  const RateFunction f = RateFunction::consumption_linear(1.0);
  CHECK_THROWS_AS(f(-0.1), DomainError);
  CHECK_THROWS_AS(f.derivative(-1e-9), DomainError);
}

TEST_CASE("consumption laws have no balance concentration") {
  CHECK_THROWS_AS(RateFunction::consumption_linear(1.0).root(), DomainError);
}

TEST_CASE("custom rate without a derivative falls back to differencing") {
  const RateFunction f =
      RateFunction::custom_consumption([](double s) { return std::tanh(s); }, nullptr, 1.0);
  CHECK_FALSE(f.has_analytic_derivative());
  const double d = f.derivative(0.5);
  const double exact = 1.0 - std::tanh(0.5) * std::tanh(0.5);
  CHECK_THAT(d, WithinAbs(exact, 1e-6));
  // the one-sided stencil near zero must not probe negative concentrations
  CHECK_NOTHROW(f.derivative(0.0));
}

TEST_CASE("custom rate with a supplied derivative uses it verbatim") {
  const RateFunction g = RateFunction::custom_proliferation(
      [](double s) { return s * s - 0.25; }, [](double s) { return 2.0 * s; }, 20.0, 0.5);
  CHECK(g.has_analytic_derivative());
  CHECK(g.derivative(3.0) == 6.0);
  CHECK(g.root() == 0.5);
}

// ---------------------------------------------------------------------------
// parameter validation
// ---------------------------------------------------------------------------

TEST_CASE("the linear catalog defaults pass every check") {
  const ValidationReport rep = validate_params(catalog_defaults());
  CHECK(rep.all_passed());
  CHECK(rep.checks.size() == 4);
  CHECK(rep.warnings.empty());
  CHECK_NOTHROW(ensure_valid(catalog_defaults()));
}

TEST_CASE("dead-core threshold above the balance point fails validation") {
  ModelParams p = catalog_defaults();
  p.sigma_D = 1.2;  // above both sigma_tilde = 1 and sigma_bar = 1
  const ValidationReport rep = validate_params(p);
  CHECK_FALSE(rep.all_passed());
  bool threshold_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "threshold_order") threshold_failed = !c.passed;
  CHECK(threshold_failed);
  CHECK_THROWS_AS(ensure_valid(p), AssumptionError);
}

TEST_CASE("strong proliferation penalty below the balance point fails validation") {
  ModelParams p = catalog_defaults();
  // g(sigma_D) + nu = 3 (0.5 - 1) + 1 = -0.5 < 0
  p.g = RateFunction::proliferation_linear(3.0, 1.0);
  const ValidationReport rep = validate_params(p);
  CHECK_FALSE(rep.all_passed());
  CHECK_THROWS_AS(ensure_valid(p), AssumptionError);
}

TEST_CASE("non-positive scalars fail the positivity check") {
  ModelParams p = catalog_defaults();
  p.beta = 0.0;
  const ValidationReport rep = validate_params(p);
  CHECK_FALSE(rep.all_passed());
  CHECK_FALSE(rep.checks.front().passed);  // positivity is reported first
  CHECK_THROWS_AS(ensure_valid(p), AssumptionError);
}

TEST_CASE("a non-monotone custom consumption rate is caught by sampling") {
  ModelParams p = catalog_defaults();
  p.f = RateFunction::custom_consumption([](double s) { return std::sin(s); }, nullptr, 1.0);
  const ValidationReport rep = validate_params(p);
  CHECK_FALSE(rep.all_passed());
  bool monotone_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "consumption_monotone" && !c.passed) {
      monotone_failed = true;
      CHECK(c.first_violation.has_value());
    }
  CHECK(monotone_failed);
}

TEST_CASE("a long flat stretch in a custom proliferation rate is only a warning") {
  ModelParams p = catalog_defaults();
  p.g = RateFunction::custom_proliferation(
      [](double s) { return s < 1.0 ? -1.0 : s - 2.0; }, nullptr, 1.0, 2.0);
  p.sigma_bar = 3.0;
  const ValidationReport rep = validate_params(p);
  CHECK(!rep.warnings.empty());
}

TEST_CASE("degenerate sampling grids are widened to usable defaults") {
  const SamplingGrid grid{-5.0, 10};
  const ValidationReport rep = validate_params(catalog_defaults(), grid);
  CHECK(rep.sigma_max >= 2.0);
  CHECK(rep.points >= 1000);
}

// ---------------------------------------------------------------------------
// scalar root finding
// ---------------------------------------------------------------------------

TEST_CASE("bisection converges for residuals of either orientation") {
  const num::BisectOptions opt{1e-12, 1e-15, 1e-9, 256};
  auto up = [](double x) { return x - 0.3; };
  auto down = [](double x) { return 0.3 - x; };
  const num::BisectResult a = num::bisect(up, 0.0, up(0.0), 1.0, up(1.0), opt, "up");
  const num::BisectResult b = num::bisect(down, 0.0, down(0.0), 1.0, down(1.0), opt, "down");
  CHECK_THAT(a.x, WithinAbs(0.3, 1e-11));
  CHECK_THAT(b.x, WithinAbs(0.3, 1e-11));
  CHECK_FALSE(a.hit_width_floor);
}

TEST_CASE("bisection returns exact endpoint roots without iterating") {
  auto f = [](double x) { return x; };
  const num::BisectResult r = num::bisect(f, 0.0, 0.0, 1.0, 1.0, {1e-12, 1e-15, 1e-9}, "edge");
  CHECK(r.x == 0.0);
  CHECK(r.evals == 0);
}

TEST_CASE("bisection rejects endpoints on the same side") {
  auto f = [](double x) { return x + 1.0; };
  CHECK_THROWS_AS(num::bisect(f, 0.0, 1.0, 1.0, 2.0, {1e-12, 1e-15, 1e-9}, "bad"),
                  ConsistencyError);
}

TEST_CASE("interval collapse falls back only within the relaxed residual") {
  // a jump discontinuity: the residual never gets small, the interval does
  auto jump = [](double x) { return x < 0.5 ? -1e-3 : 1e-3; };
  const num::BisectResult ok =
      num::bisect(jump, 0.0, -1e-3, 1.0, 1e-3, {1e-9, 1e-6, 1e-2, 256}, "jump");
  CHECK(ok.hit_width_floor);
  CHECK_THAT(ok.x, WithinAbs(0.5, 1e-5));
  CHECK_THROWS_AS(num::bisect(jump, 0.0, -1e-3, 1.0, 1e-3, {1e-9, 1e-6, 1e-6, 256}, "jump"),
                  ConvergenceError);
}

TEST_CASE("geometric bracketing walks in the right direction") {
  auto f = [](double x) { return 1.0 - x; };  // decreasing, root at 1
  const num::Bracket up = num::bracket_decreasing(f, 0.125, 60, "up");
  CHECK(up.f_lo > 0.0);
  CHECK(up.f_hi <= 0.0);
  CHECK(up.lo < up.hi);
  const num::Bracket down = num::bracket_decreasing(f, 8.0, 60, "down");
  CHECK(down.f_lo >= 0.0);
  CHECK(down.f_hi < 0.0);
  CHECK(down.lo <= 1.0);
  CHECK(down.hi <= 8.0);
}

TEST_CASE("bracketing gives up after the doubling budget") {
  auto f = [](double) { return 1.0; };
  CHECK_THROWS_AS(num::bracket_decreasing(f, 1.0, 8, "flat"), ConvergenceError);
}

TEST_CASE("composite Simpson integrates cubics exactly") {
  std::vector<double> y(5);
  const double h = 0.25;
  for (int i = 0; i < 5; ++i) {
    const double s = h * i;
    y[i] = s * s * s;
  }
  CHECK_THAT(num::simpson_uniform(y, h), WithinAbs(0.25, 1e-15));
  std::vector<double> even(4, 1.0);
  CHECK_THROWS_AS(num::simpson_uniform(even, h), DomainError);
}

// ---------------------------------------------------------------------------
// initial value solver
// ---------------------------------------------------------------------------

TEST_CASE("exponential decay integrates to reference accuracy") {
  auto rhs = [](double, const num::State<1>& y) { return num::State<1>{{-y[0]}}; };
  auto nosink = [](const num::Step<1>&) { return num::ControlFlow::Continue; };
  const auto [y1, status] = num::integrate<1>(rhs, 0.0, 1.0, {{1.0}}, {}, nosink);
  CHECK_THAT(y1[0], WithinAbs(std::exp(-1.0), 1e-9));
  CHECK(status.t == 1.0);
  CHECK_FALSE(status.stopped_early);
}

TEST_CASE("a full oscillator period returns to the start") {
  auto rhs = [](double, const num::State<2>& y) { return num::State<2>{{y[1], -y[0]}}; };
  const double two_pi = 2.0 * std::acos(-1.0);
  num::IvpOptions opt;
  opt.rtol = opt.atol = 1e-12;
  auto nosink = [](const num::Step<2>&) { return num::ControlFlow::Continue; };
  const auto [y1, status] = num::integrate<2>(rhs, 0.0, two_pi, {{1.0, 0.0}}, opt, nosink);
  (void)status;
  CHECK_THAT(y1[0], WithinAbs(1.0, 1e-9));
  CHECK_THAT(y1[1], WithinAbs(0.0, 1e-9));
}

TEST_CASE("step reconstruction tracks the exact solution between mesh points") {
  auto rhs = [](double, const num::State<1>& y) { return num::State<1>{{-y[0]}}; };
  // cubic reconstruction is fourth order in the step for values and third
  // order for slopes, one and two orders below the stepper itself
  double worst_value = 0.0, worst_deriv = 0.0;
  auto sink = [&](const num::Step<1>& st) {
    for (int k = 1; k < 4; ++k) {
      const double t = st.t0 + 0.25 * k * (st.t1 - st.t0);
      const double want = std::exp(-t);
      worst_value = std::max(worst_value, std::abs(num::hermite_value(st, t)[0] - want));
      worst_deriv = std::max(worst_deriv, std::abs(num::hermite_deriv(st, t)[0] + want));
    }
    return num::ControlFlow::Continue;
  };
  num::IvpOptions opts;
  opts.rtol = opts.atol = 1e-12;
  num::integrate<1>(rhs, 0.0, 2.0, {{1.0}}, opts, sink);
  CHECK(worst_value < 1e-9);
  CHECK(worst_deriv < 2e-7);
}

TEST_CASE("a sink can stop the integration early") {
  auto rhs = [](double, const num::State<1>& y) { return num::State<1>{{-y[0]}}; };
  auto sink = [](const num::Step<1>& st) {
    return st.y1[0] < 0.5 ? num::ControlFlow::Stop : num::ControlFlow::Continue;
  };
  const auto [y1, status] = num::integrate<1>(rhs, 0.0, 50.0, {{1.0}}, {}, sink);
  CHECK(status.stopped_early);
  CHECK(status.t < 1.0);
  CHECK(y1[0] < 0.5);
}

TEST_CASE("an exhausted step budget reports failure to converge") {
  auto rhs = [](double, const num::State<1>& y) { return num::State<1>{{-y[0]}}; };
  num::IvpOptions opt;
  opt.max_steps = 2;
  auto nosink = [](const num::Step<1>&) { return num::ControlFlow::Continue; };
  CHECK_THROWS_AS(num::integrate<1>(rhs, 0.0, 100.0, {{1.0}}, opt, nosink), ConvergenceError);
}

TEST_CASE("an explicit initial step size caps the first step") {
  auto rhs = [](double, const num::State<1>& y) { return num::State<1>{{-y[0]}}; };
  num::IvpOptions opt;
  opt.h_init = 1e-3;
  double first = -1.0;
  auto sink = [&](const num::Step<1>& st) {
    if (first < 0.0) first = st.t1 - st.t0;
    return num::ControlFlow::Continue;
  };
  num::integrate<1>(rhs, 0.0, 1.0, {{1.0}}, opt, sink);
  CHECK(first > 0.0);
  CHECK(first <= 1e-3 * (1.0 + 1e-12));
}
