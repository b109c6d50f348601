#include <cmath>

#include "doctest.h"
#include "ness/junction.hpp"
#include "ness/solver.hpp"
#include "oracles.hpp"

using namespace ness;

TEST_CASE("gamma values") {
  CHECK(solve_gamma(1.0) == doctest::Approx(0.9624236501192063).epsilon(1e-13));
  CHECK(solve_gamma(1.0 / 6.0) == doctest::Approx(2.06343706889556).epsilon(1e-13));
  // e^gamma is the golden ratio squared at J = 1
  CHECK(std::exp(solve_gamma(1.0)) == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-13));
  CHECK_THROWS_AS(solve_gamma(0.0), std::invalid_argument);
  CHECK_THROWS_AS(junction_profile(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("property: gamma solves its defining equation and decreases in J") {
  double previous = std::numeric_limits<double>::infinity();
  for (double j = 0.01; j < 50.0; j *= 1.37) {
    const double g = solve_gamma(j);
    const double omega = junction_contraction(j);
    REQUIRE(std::abs(omega * (2.0 + std::cosh(g)) - 3.0) < 1e-12);
    REQUIRE(g == doctest::Approx(gamma_closed_form(j)).epsilon(1e-12));
    REQUIRE(g < previous);
    previous = g;
  }
}

TEST_CASE("junction value at the origin") {
  CHECK(junction_profile(1.0, -1.0).m0 == doctest::Approx(-0.2763932022500209).epsilon(1e-13));
  CHECK(junction_profile(1.0 / 6.0, -1.0).m0 == doctest::Approx(-0.11270166537925827).epsilon(1e-13));
  // closed forms: -(1 - 1/sqrt5)/2 and -(1 - sqrt(3/5))/2
  CHECK(junction_profile(1.0, -1.0).m0 == doctest::Approx(-(1.0 - 1.0 / std::sqrt(5.0)) / 2.0).epsilon(1e-13));
  CHECK(junction_profile(1.0 / 6.0, -1.0).m0 == doctest::Approx(-(1.0 - std::sqrt(0.6)) / 2.0).epsilon(1e-13));
}

TEST_CASE("property: layer bounds, reflection and recursion") {
  for (double j : {0.05, 1.0 / 6.0, 0.5, 1.0, 3.0, 20.0})
    for (double h : {-0.1, -1.0, -4.0}) {
      const auto layer = junction_profile(j, h);
      REQUIRE(layer.m0 == doctest::Approx(-std::abs(h) / (1.0 + std::exp(layer.gamma))).epsilon(1e-12));
      REQUIRE(layer.m0 < 0.0);
      REQUIRE(layer.m0 > h / 2.0);
      for (int x1 = -30; x1 <= 30; ++x1) {
        REQUIRE(std::abs(layer.recursion_residual(x1)) < 1e-13);
        REQUIRE(std::abs(layer(x1) + layer(-1 - x1) - h) < 1e-13);
        REQUIRE(layer(x1) <= 0.0);
        REQUIRE(layer(x1) >= h);
        if (x1 < 30) REQUIRE(layer(x1 + 1) >= layer(x1));
      }
    }
}

TEST_CASE("series agrees with an independent convolution") {
  for (double j : {1.0 / 6.0, 1.0})
    for (int x1 : {-4, -1, 0, 1, 3}) {
      const int steps = 40;
      const double omega = 6.0 * j / (1.0 + 6.0 * j);
      double ref = 0.0;
      for (int n = 0; n <= steps; ++n) ref += std::pow(omega, n) * oracle::lazy_walk_mass_below_zero(x1, n);
      ref *= -1.0 / (1.0 + 6.0 * j);
      CHECK(junction_series_oracle(j, -1.0, x1, steps) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("series converges to the matched profile") {
  for (double j : {1.0 / 6.0, 1.0}) {
    const auto layer = junction_profile(j, -1.0);
    for (int x1 = -5; x1 <= 5; ++x1) {
      const double s = junction_series_oracle(j, -1.0, x1, 600);
      CHECK(std::abs(s - layer(x1)) <= junction_series_tail_bound(j, -1.0, 600) + 1e-13);
    }
    // the omitted tail is always bounded
    for (int n_max : {20, 60, 120}) {
      const double s = junction_series_oracle(j, -1.0, 0, n_max);
      CHECK(std::abs(s - layer.m0) <= junction_series_tail_bound(j, -1.0, n_max) + 1e-13);
    }
  }
  // at J = 1 sixty terms leave a visible remainder; at J = 1/6 they do not
  CHECK(std::abs(junction_series_oracle(1.0, -1.0, 0, 60) - junction_profile(1.0, -1.0).m0) > 1e-5);
  CHECK(std::abs(junction_series_oracle(1.0 / 6.0, -1.0, 0, 60) - junction_profile(1.0 / 6.0, -1.0).m0) < 1e-10);
}

TEST_CASE("finite-volume profile approaches the layer") {
  const auto st =
      stationary_mean(assemble<double>(share(LatticeDomain::darken(12)), ModelParams::darken(1.0, 1.0, -1.0, 0.0)));
  const auto layer = junction_profile(1.0, -1.0);
  for (int x1 = -6; x1 <= 5; ++x1) CHECK(std::abs(st.mean()(st.domain().axis_index(x1)) - layer(x1)) < 1e-8);
}

TEST_CASE("macroscopic profile") {
  CHECK(macroscopic_profile(1.0, 1.0, -1.0) == doctest::Approx(-0.5));
  CHECK(macroscopic_profile(-1.0, 1.0, -1.0) == doctest::Approx(-0.5));
  CHECK(macroscopic_profile(-0.5, 2.0, -1.0) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(macroscopic_profile(0.0, 1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(macroscopic_profile(2.0, 1.0, -1.0), std::invalid_argument);
  CHECK(macroscopic_slope(1.0) == -0.5);
  CHECK(macroscopic_current(1.0) == 0.5);
}
