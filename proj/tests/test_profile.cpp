#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fbtumor/errors.hpp"
#include "fbtumor/free_boundary.hpp"
#include "fbtumor/model_params.hpp"
#include "fbtumor/profile.hpp"
#include "oracles.hpp"

using namespace fbtumor;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

/// Linear consumption catalog with a comfortable assumption margin: the
/// proliferation balance point sits at 0.3 and the dead-core threshold at
/// 0.25, so any sigma_bar >= 0.5 is admissible.
ModelParams linear_params(double sigma_bar = 1.0, double beta = 1.0) {
  return ModelParams{RateFunction::consumption_linear(1.0),
                     RateFunction::proliferation_linear(1.0, 0.3),
                     sigma_bar, beta, 1.0, 0.25};
}

ModelParams mm_params(double sigma_bar = 1.0, double beta = 1.0) {
  return ModelParams{RateFunction::consumption_michaelis_menten(1.5, 0.8),
                     RateFunction::proliferation_linear(1.0, 0.3),
                     sigma_bar, beta, 1.0, 0.25};
}

/// Default-threshold catalog used by the dead-core tests.
ModelParams core_params(double sigma_bar = 1.0) {
  return ModelParams{RateFunction::consumption_linear(1.0),
                     RateFunction::proliferation_linear(1.0, 1.0),
                     sigma_bar, 1.0, 1.0, 0.5};
}

}  // namespace

// ---------------------------------------------------------------------------
// the explicit linear solution
// ---------------------------------------------------------------------------

TEST_CASE("explicit linear solution hits hand-computed anchor values") {
  // eta = 0, R = beta = sigma_bar = 1: u(s) = sinh(s)/(s cosh 1)
  CHECK_THAT(closed_form_linear(1.0, 0.0, 1.0, 1.0, 1.0), WithinRel(std::tanh(1.0), 1e-14));
  CHECK_THAT(closed_form_linear(0.0, 0.0, 1.0, 1.0, 1.0),
             WithinRel(1.0 / std::cosh(1.0), 1e-14));
  // eta = 1/2, R = 2: the surface value collapses to exactly 2/3
  CHECK_THAT(closed_form_linear(1.0, 0.5, 2.0, 1.0, 1.0), WithinRel(2.0 / 3.0, 1e-14));
}

TEST_CASE("explicit linear solution agrees with the independent oracle form") {
  oracle::Rng rng(0x5eed0001u);
  for (int i = 0; i < 10; ++i) {
    const double eta = rng.uniform(0.0, 0.8);
    const double R = rng.uniform(0.2, 6.0);
    const double beta = rng.uniform(0.2, 5.0);
    const double sb = rng.uniform(0.5, 3.0);
    CHECK_THAT(closed_form_linear(eta, eta, R, beta, sb),
               WithinRel(oracle::interface_value_linear(eta, R, beta, sb), 1e-12));
  }
}

TEST_CASE("explicit linear solution rejects out-of-domain arguments") {
  CHECK_THROWS_AS(closed_form_linear(0.5, 0.6, 1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(closed_form_linear(0.5, 0.0, -1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(closed_form_linear(1.5, 0.0, 1.0, 1.0, 1.0), DomainError);
}

// ---------------------------------------------------------------------------
// the shooting solver
// ---------------------------------------------------------------------------

TEST_CASE("shooting solver reproduces the explicit linear solution") {
  struct Case {
    double eta, R, beta, sb;
  };
  for (const Case& c : {Case{0.0, 1.0, 1.0, 1.0}, Case{0.5, 2.0, 1.0, 1.0},
                        Case{0.3, 4.0, 2.5, 2.0}}) {
    ModelParams p = linear_params(c.sb, c.beta);
    const NutrientProfile prof = solve_profile(c.eta, c.R, p, 1e-11);
    double worst = 0.0;
    for (std::size_t i = 0; i < prof.s.size(); ++i)
      worst = std::max(worst, std::abs(prof.u[i] - closed_form_linear(prof.s[i], c.eta, c.R,
                                                                      c.beta, c.sb)));
    CHECK(worst <= 1e-9 * c.sb);
  }
}

TEST_CASE("solved profiles respect the comparison bounds") {
  for (const ModelParams& p : {linear_params(), mm_params(2.0, 0.7)}) {
    for (const double eta : {0.0, 0.4}) {
      const NutrientProfile prof = solve_profile(eta, 3.0, p);
      REQUIRE(prof.s.size() == prof.u.size());
      CHECK(prof.u.front() > 0.0);
      CHECK(prof.u.back() < p.sigma_bar);
      CHECK(prof.u_prime.front() == 0.0);
      for (std::size_t i = 1; i < prof.u.size(); ++i) {
        CHECK(prof.u[i] >= prof.u[i - 1]);       // concentration rises outward
        CHECK(prof.u_prime[i] >= -1e-9);         // no interior maximum
      }
      // the surface transfer condition is met to solver accuracy
      CHECK(std::abs(prof.robin_residual) <= 1e3 * prof.tol);
    }
  }
}

TEST_CASE("profile interpolation matches nodes and stays smooth between them") {
  const ModelParams p = linear_params();
  const NutrientProfile prof = solve_profile(0.0, 2.0, p, 1e-11);
  CHECK(prof.value_at(prof.s[512]) == prof.u[512]);
  CHECK_THAT(prof.deriv_at(0.0), WithinAbs(0.0, 1e-12));
  // halfway between nodes the reconstruction still tracks the exact solution
  const double mid = 0.5 * (prof.s[100] + prof.s[101]);
  CHECK_THAT(prof.value_at(mid), WithinAbs(closed_form_linear(mid, 0.0, 2.0, 1.0, 1.0), 1e-9));
  CHECK(prof.center() == prof.u.front());
}

TEST_CASE("shooting solver validates its inputs") {
  const ModelParams p = linear_params();
  CHECK_THROWS_AS(solve_profile(1.0, 2.0, p), DomainError);
  CHECK_THROWS_AS(solve_profile(-0.1, 2.0, p), DomainError);
  CHECK_THROWS_AS(solve_profile(0.0, 0.0, p), DomainError);
  CHECK_THROWS_AS(solve_profile(0.0, 2.0, p, 0.0), DomainError);
  ModelParams bad = p;
  bad.nu = -1.0;
  CHECK_THROWS_AS(solve_profile(0.0, 2.0, bad), AssumptionError);
}

TEST_CASE("center concentration falls as the tumor grows") {
  const ModelParams p = linear_params();
  double prev = center_value(0.0, 0.5, p);
  for (const double R : {1.0, 2.0, 4.0, 8.0}) {
    const double c = center_value(0.0, R, p);
    CHECK(c < prev);
    prev = c;
  }
}

// ---------------------------------------------------------------------------
// dead-core geometry
// ---------------------------------------------------------------------------

TEST_CASE("threshold radius matches a bisection on the explicit center value") {
  for (const double beta : {0.5, 1.0, 2.0}) {
    ModelParams p = core_params();
    p.beta = beta;
    const double got = critical_radius(p, 1e-10);
    const double want = oracle::bisect(
        [&](double R) { return oracle::center_linear(R, beta, 1.0) - 0.5; }, 0.05, 60.0,
        1e-11);
    CHECK_THAT(got, WithinAbs(want, 1e-7));
  }
}

TEST_CASE("core fraction is zero at the threshold and grows with the radius") {
  const ModelParams p = core_params();
  const double R_c = critical_radius(p, 1e-10);
  CHECK(necrotic_fraction(R_c, p, 1e-10) <= 1e-6);
  double prev = 0.0;
  for (const double factor : {1.2, 2.0, 5.0, 20.0}) {
    const double eta = necrotic_fraction(factor * R_c, p);
    CHECK(eta > prev);
    CHECK(eta < 1.0);
    prev = eta;
  }
}

TEST_CASE("core fraction matches the explicit-solution oracle at R = 2") {
  const ModelParams p = core_params();
  const double got = necrotic_fraction(2.0, p, 1e-10);
  const double want = oracle::bisect(
      [&](double eta) { return oracle::interface_value_linear(eta, 2.0, 1.0, 1.0) - 0.5; },
      1e-9, 1.0 - 1e-9, 1e-11);
  CHECK_THAT(got, WithinAbs(want, 1e-6));
}

TEST_CASE("no core exists below the threshold radius") {
  const ModelParams p = core_params();
  CHECK_THROWS_AS(necrotic_fraction(1.0, p), DomainError);
}

TEST_CASE("radius and core fraction invert each other") {
  const ModelParams p = core_params();
  const double R = radius_for_fraction(0.3, p, 1e-10);
  CHECK_THAT(necrotic_fraction(R, p, 1e-10), WithinAbs(0.3, 1e-6));
  // a vanishing fraction lands on the threshold radius itself
  CHECK_THAT(radius_for_fraction(0.0, p, 1e-10), WithinAbs(critical_radius(p, 1e-10), 1e-6));
  CHECK_THROWS_AS(radius_for_fraction(1.0, p), DomainError);
  CHECK_THROWS_AS(radius_for_fraction(-0.2, p), DomainError);
}

TEST_CASE("assembled states pick the branch the radius dictates") {
  const ModelParams p = core_params();
  const double R_c = critical_radius(p);

  const TumorState small = assemble_state(0.8 * R_c, p);
  CHECK(small.phase == Phase::Nonnecrotic);
  CHECK(small.eta == 0.0);
  CHECK(small.rho == 0.0);
  CHECK(small.profile.center() > p.sigma_D);

  const TumorState big = assemble_state(2.0 * R_c, p);
  CHECK(big.phase == Phase::Necrotic);
  CHECK(big.eta > 0.0);
  CHECK_THAT(big.rho, WithinRel(big.eta * big.R, 1e-12));
  // the interface concentration equals the dead-core level
  CHECK_THAT(big.profile.center(), WithinAbs(p.sigma_D, 1e-6));

  // exactly at the threshold the state counts as core-free
  const TumorState edge = assemble_state(R_c, p);
  CHECK(edge.phase == Phase::Nonnecrotic);
}

TEST_CASE("physical concentration is flat inside the core and continuous at its edge") {
  const ModelParams p = core_params();
  const TumorState st = assemble_state(3.0, p);
  REQUIRE(st.phase == Phase::Necrotic);
  CHECK(st.sigma_at(0.0) == p.sigma_D);
  CHECK(st.sigma_at(0.5 * st.rho) == p.sigma_D);
  CHECK_THAT(st.sigma_at(st.rho * 1.0000001), WithinAbs(p.sigma_D, 1e-5));
  CHECK(st.sigma_at(st.R) < p.sigma_bar);
  CHECK(st.sigma_at(st.R) > p.sigma_D);
  CHECK_THROWS_AS(st.sigma_at(st.R * 1.01), DomainError);
  CHECK_THROWS_AS(st.sigma_at(-0.1), DomainError);
}

TEST_CASE("concentration increases monotonically through the free interface") {
  const ModelParams p = core_params(1.4);
  const TumorState st = assemble_state(4.0, p);
  REQUIRE(st.phase == Phase::Necrotic);
  double prev = st.sigma_at(0.0);
  for (int i = 1; i <= 64; ++i) {
    const double r = st.R * double(i) / 64.0;
    const double v = st.sigma_at(r);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}
