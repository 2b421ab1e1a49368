#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "majperc/couplings.hpp"
#include "test_util.hpp"

using namespace majperc;

TEST_CASE("delta-prime formula") {
  CHECK(continuity_delta_prime(0.55, 0.1) ==
        doctest::Approx((1.0 - 0.55 - 0.1) * (1.0 - std::exp(-0.1))).epsilon(1e-15));
  CHECK(continuity_delta_prime(0.55, 0.1) == doctest::Approx(0.0333069).epsilon(1e-4));
  // delta -> 0 limit
  CHECK(continuity_delta_prime(0.5, 1e-9) == doctest::Approx(0.5e-9).epsilon(1e-5));
  CHECK(continuity_delta_prime(0.9, 0.1) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("monotone coupling preserves order pathwise") {
  Rect r{0, 15, 0, 15};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (BoundaryPolicy policy : {BoundaryPolicy::FreeFinite, BoundaryPolicy::FrozenZero}) {
      CoupledPair pair = monotone_p_pair(0.4, 0.6, 1.0, r, seed, 0, policy, /*strict=*/true);
      CHECK(pair.order_violations == 0);
      CHECK(leq(pair.lower, pair.upper));
    }
  }
}

TEST_CASE("monotone coupling marginals and degenerate cases") {
  Rect r{0, 31, 0, 31};
  // equal densities give identical processes
  CoupledPair same = monotone_p_pair(0.5, 0.5, 1.0, r, 99);
  CHECK(same.lower == same.upper);
  CHECK(same.order_violations == 0);
  CHECK_THROWS_AS(monotone_p_pair(0.7, 0.3, 1.0, r, 0), std::invalid_argument);

  // each marginal equals an independently-run process at its own density
  CoupledPair pair = monotone_p_pair(0.45, 0.55, 0.8, r, 123, 7);
  UniformField field(SeedSpec{123, 7, "init"}, r);
  ClockStream clocks(SeedSpec{123, 7, "clock"});
  CHECK(pair.lower ==
        evolve_forward(random_init(r, 0.45, field), clocks, 0.8, BoundaryPolicy::FreeFinite));
  CHECK(pair.upper ==
        evolve_forward(random_init(r, 0.55, field), clocks, 0.8, BoundaryPolicy::FreeFinite));
}

TEST_CASE("t=0 coupling is the initial-field coupling") {
  Rect r{0, 20, 0, 20};
  CoupledPair pair = monotone_p_pair(0.3, 0.7, 0.0, r, 5);
  UniformField field(SeedSpec{5, 0, "init"}, r);
  CHECK(pair.lower == random_init(r, 0.3, field));
  CHECK(pair.upper == random_init(r, 0.7, field));
  CHECK(pair.order_violations == 0);
}

TEST_CASE("continuity coupling dominates pathwise") {
  Rect r{0, 23, 0, 23};
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    ContinuityPair cp = continuity_pair(0.55, 0.1, 1.0, r, seed);
    CHECK(cp.pair.order_violations == 0);
    CHECK(leq(cp.pair.lower, cp.pair.upper));
    CHECK(cp.pair.p_lower == doctest::Approx(0.65));
    CHECK(cp.pair.p_upper ==
          doctest::Approx(0.65 + continuity_delta_prime(0.55, 0.1)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(continuity_pair(0.95, 0.1, 1.0, r, 0), std::invalid_argument);
  CHECK_THROWS_AS(continuity_pair(0.5, 0.0, 1.0, r, 0), std::invalid_argument);
}

TEST_CASE("phase-boundary state is init OR an early first ring") {
  Rect r{0, 15, 0, 15};
  const double p = 0.5, delta = 0.2;
  ContinuityPair cp = continuity_pair(p, delta, 0.5, r, 77, 3);
  UniformField field(SeedSpec{77, 3, "init"}, r);
  ClockStream clocks(SeedSpec{77, 3, "clock"});
  SpinConfig init = random_init(r, p + delta, field);
  for (std::int64_t i = 0; i < r.area(); ++i) {
    Site s = r.site_at(i);
    bool expect = init.get(s) || clocks.first_ring(s) <= delta;
    CHECK(cp.upper_at_delta.get(s) == expect);
  }
}

TEST_CASE("upper marginal at the phase boundary is Bernoulli(p+delta+delta')") {
  Rect r{0, 49, 0, 49};
  const double p = 0.55, delta = 0.1;
  const double q = p + delta + continuity_delta_prime(p, delta);
  std::int64_t ones = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    ContinuityPair cp = continuity_pair(p, delta, 0.2, r, 1000 + seed);
    ones += cp.upper_at_delta.count_ones();
    total += r.area();
  }
  double sigma = std::sqrt(q * (1 - q) / total);
  CHECK(std::abs(static_cast<double>(ones) / total - q) < 4 * sigma);
}

TEST_CASE("lower marginal of the continuity pair is the plain process") {
  Rect r{0, 15, 0, 15};
  ContinuityPair cp = continuity_pair(0.5, 0.15, 0.7, r, 31, 2);
  UniformField field(SeedSpec{31, 2, "init"}, r);
  ClockStream clocks(SeedSpec{31, 2, "clock"});
  SpinConfig init = random_init(r, 0.65, field);
  CHECK(cp.pair.lower == evolve_forward(init, clocks, 0.85, BoundaryPolicy::FreeFinite));
}
