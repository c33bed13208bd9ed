#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ckdist/bounds.hpp"

using namespace ckdist;

TEST_CASE("ck upper bound evaluates the closed form") {
  CHECK(std::abs(ck_upper_bound(0.5, 2) - 2.0 * 0.5 / 1.5) <= 1e-15);
  CHECK(std::abs(ck_upper_bound(0.1, 2) - 0.2 / 1.1) <= 1e-15);
  CHECK(ck_upper_bound(1e-9, 2) < 1e-8);  // vanishes with delta
  CHECK_THROWS_AS(ck_upper_bound(0.0, 2), Error);
  CHECK_THROWS_AS(ck_upper_bound(1.0, 2), Error);
  CHECK_THROWS_AS(ck_upper_bound(0.5, 1), Error);
}

TEST_CASE("bound is increasing in delta and decreasing in m") {
  for (std::size_t m = 2; m <= 10; ++m) {
    double previous = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double delta = j / 51.0;
      const double bound = ck_upper_bound(delta, m);
      CHECK(bound > previous);
      CHECK(bound > 0.0);
      CHECK(bound < 1.0);
      previous = bound;
    }
  }
  for (int j = 1; j <= 20; ++j) {
    const double delta = j / 21.0;
    for (std::size_t m = 2; m <= 9; ++m)
      CHECK(ck_upper_bound(delta, m + 1) < ck_upper_bound(delta, m));
  }
}

TEST_CASE("impossibility threshold inverts the bound") {
  CHECK(bisim_impossibility_threshold(1.0, 2) == 1.0);
  CHECK(std::abs(bisim_impossibility_threshold(0.2, 2) - 0.2 / 1.8) <= 1e-15);
  CHECK_THROWS_AS(bisim_impossibility_threshold(0.0, 2), Error);
  CHECK_THROWS_AS(bisim_impossibility_threshold(1.2, 2), Error);

  for (std::size_t m : {std::size_t{2}, std::size_t{5}}) {
    for (int j = 1; j <= 40; ++j) {
      const double x = j / 41.0;
      const double round_trip = ck_upper_bound(bisim_impossibility_threshold(x, m), m);
      CHECK(std::abs(round_trip - x) <= 1e-12);
    }
  }
}

TEST_CASE("finite-horizon TV bound for bisimilar chains") {
  CHECK(tv_bisim_bound(0.3, 0) == 0.0);
  CHECK(std::abs(tv_bisim_bound(0.1, 1) - 0.1) <= 1e-15);
  CHECK(std::abs(tv_bisim_bound(0.5, 2) - 0.75) <= 1e-15);
  CHECK_THROWS_AS(tv_bisim_bound(0.0, 3), Error);
  CHECK_THROWS_AS(tv_bisim_bound(0.5, -1), Error);
}

TEST_CASE("TV bound from a CK upper bound clamps at one") {
  CHECK(tv_from_ck_bound(0.25, 1, 2) == 0.25);
  CHECK(std::abs(tv_from_ck_bound(0.001, 5, 2) - 0.016) <= 1e-15);
  CHECK(tv_from_ck_bound(0.5, 10, 2) == 1.0);
  CHECK_THROWS_AS(tv_from_ck_bound(0.5, 0, 2), Error);
}

TEST_CASE("maximal safe horizon") {
  CHECK(max_safe_horizon(0.1, 0.001, 2) == 7);
  CHECK(max_safe_horizon(0.025, 0.025, 2) == 1);  // only k = 1 is safe
  CHECK(max_safe_horizon(0.01, 0.1, 2) == 0);     // no safe horizon
  CHECK(max_safe_horizon(0.9, 1e-9, 2) == 30);    // 2^29 * 1e-9 <= 0.9 < 2^30 * 1e-9
  CHECK_THROWS_AS(max_safe_horizon(0.0, 0.5, 2), Error);
  CHECK_THROWS_AS(max_safe_horizon(0.5, 0.0, 2), Error);

  // The returned horizon is safe and maximal against the raw predicate.
  for (int j = 1; j <= 30; ++j) {
    const double eps = 0.3;
    const double d_upper = eps / std::pow(1.7, j);
    const auto k = max_safe_horizon(eps, d_upper, 2);
    REQUIRE(k >= 1);
    CHECK(std::pow(2.0L, static_cast<long double>(k - 1)) * d_upper <= eps);
    CHECK(std::pow(2.0L, static_cast<long double>(k)) * d_upper > eps);
  }
}
