#include <doctest.h>

#include "robusthedge/simulation.hpp"
#include "robusthedge/superhedge.hpp"
#include "support.hpp"

using namespace robusthedge;

namespace {

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("bsb") {
  TEST_CASE("closed form against the quadrature oracle") {
    for (double S : {80.0, 100.0, 125.0})
      for (double sigma : {0.1, 0.2, 0.35})
        CHECK(std::abs(black_scholes_call(S, 100.0, sigma, 1.0) - testsupport::bs_call_oracle(S, 100.0, sigma, 1.0)) <= 1e-9);
    CHECK(black_scholes_call(120.0, 100.0, 0.2, 0.0) == 20.0);
  }

  TEST_CASE("singleton volatility reproduces Black-Scholes") {
    const auto spec = UncertaintySpec::scalar(100.0, 0.04, 0.04, 1.0, 100);
    const BsbSurface s = bsb_solve(spec, Claim::call(100.0), {400, 400, 400.0});
    const double oracle = testsupport::bs_call_oracle(100.0, 100.0, 0.2, 1.0);
    CHECK(relative(s.price_at(100.0), oracle) <= 0.005);
    const double d1 = 0.5 * 0.2;
    CHECK(s.delta_at(0.0, 100.0) == doctest::Approx(testsupport::normal_cdf_quadrature(d1)).epsilon(0.01));
    CHECK(s.value.rows() == 401);
    CHECK(s.value.cols() == 401);
  }

  TEST_CASE("convex payoff selects the upper volatility") {
    const auto band = UncertaintySpec::scalar(100.0, 0.01, 0.04, 1.0, 100);
    const BsbSurface s = bsb_solve(band, Claim::call(100.0), {400, 400, 400.0});
    CHECK(relative(s.price_at(100.0), testsupport::bs_call_oracle(100.0, 100.0, 0.2, 1.0)) <= 0.005);
    const auto top = UncertaintySpec::scalar(100.0, 0.04, 0.04, 1.0, 100);
    CHECK(s.price_at(100.0) == doctest::Approx(bsb_solve(top, Claim::call(100.0), {400, 400, 400.0}).price_at(100.0)).epsilon(1e-12));
    CHECK(s.hi_selections > 0);
  }

  TEST_CASE("constant payoff") {
    const auto band = UncertaintySpec::scalar(100.0, 0.01, 0.04, 1.0, 100);
    const BsbSurface s = bsb_solve(band, Claim::constant(2.0), {50, 60, 300.0});
    CHECK((s.value.array() - 2.0).abs().maxCoeff() <= 1e-12);
    CHECK(s.delta.cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("non-convex payoff dominates every constant volatility") {
    const Claim fly = parse_payoff("butterfly:90:100:110");
    const auto band = UncertaintySpec::scalar(100.0, 0.01, 0.04, 1.0, 100);
    const double robust = bsb_solve(band, fly, {400, 400, 400.0}).price_at(100.0);
    for (double s2 : {0.01, 0.02, 0.03, 0.04}) {
      const auto single = UncertaintySpec::scalar(100.0, s2, s2, 1.0, 100);
      CHECK(robust >= bsb_solve(single, fly, {400, 400, 400.0}).price_at(100.0) - 1e-9);
    }
    const auto surface = bsb_solve(band, fly, {400, 400, 400.0});
    CHECK(surface.hi_selections > 0);
    CHECK(surface.hi_selections < 400u * 399u);
  }

  TEST_CASE("explicit stepper") {
    const auto spec = UncertaintySpec::scalar(100.0, 0.04, 0.04, 1.0, 100);
    // ds = 8, bound dt <= 64 / (0.04 * 160000) = 0.01.
    CHECK_THROWS_AS(bsb_solve(spec, Claim::call(100.0), {50, 50, 400.0}, Stepper::kExplicit), std::domain_error);
    const BsbSurface s = bsb_solve(spec, Claim::call(100.0), {200, 50, 400.0}, Stepper::kExplicit);
    const BsbSurface i = bsb_solve(spec, Claim::call(100.0), {200, 50, 400.0});
    CHECK(std::abs(s.price_at(100.0) - i.price_at(100.0)) <= 0.05);
  }

  TEST_CASE("grid convergence") {
    const auto spec = UncertaintySpec::scalar(100.0, 0.04, 0.04, 1.0, 100);
    const double oracle = testsupport::bs_call_oracle(100.0, 100.0, 0.2, 1.0);
    double prev = kInfinity;
    for (int n : {100, 200, 400, 800}) {
      const double err = std::abs(bsb_solve(spec, Claim::call(100.0), {n, n, 400.0}).price_at(100.0) - oracle);
      CHECK(err < prev);
      prev = err;
    }
  }

  TEST_CASE("rejections") {
    auto spec = UncertaintySpec::scalar(100.0, 0.0, 0.04, 1.0, 100);
    CHECK_THROWS_AS(bsb_solve(spec, Claim::call(100.0), {10, 10, 400.0}), std::invalid_argument);
    spec = UncertaintySpec::scalar(100.0, 0.01, 0.04, 1.0, 100);
    CHECK_THROWS_AS(bsb_solve(spec, Claim::call(100.0), {10, 1, 400.0}), std::invalid_argument);
    CHECK_THROWS_AS(bsb_solve(spec, Claim::call(100.0), {10, 10, 50.0}), std::invalid_argument);
    spec.relative_volatility = false;
    CHECK_THROWS_AS(bsb_solve(spec, Claim::call(100.0), {10, 10, 400.0}), std::invalid_argument);
  }

  TEST_CASE("surface interpolation") {
    const auto spec = UncertaintySpec::scalar(100.0, 0.01, 0.04, 1.0, 100);
    const BsbSurface s = bsb_solve(spec, Claim::call(100.0), {40, 40, 400.0});
    CHECK(s.value_at(0.0, 100.0) == s.value(0, 10));
    CHECK(s.value_at(1.0, 120.0) == doctest::Approx(20.0));
    const double mid = s.value_at(0.0, 105.0);
    CHECK(mid == doctest::Approx(0.5 * (s.value(0, 10) + s.value(0, 11))));
  }

  TEST_CASE("path verification") {
    const auto spec = UncertaintySpec::scalar(100.0, 0.01, 0.04, 1.0, 250);
    const BsbSurface s = bsb_solve(spec, Claim::call(100.0), {200, 200, 400.0});
    const auto paths = simulate_paths(spec, random_volatility_policy(spec, 1), 500, 1);
    const auto ok = verify_superhedge(paths, s.price_at(100.0), s, Claim::call(100.0), 0.05);
    CHECK(ok.paths == 500);
    CHECK(ok.violations == 0);
    CHECK(ok.mean_slack > 0.0);
    const auto poor = verify_superhedge(paths, 0.0, s, Claim::call(100.0), 0.05);
    CHECK(poor.violation_rate() > 0.1);
  }
}
