#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "majperc/dynamics.hpp"
#include "test_util.hpp"

using namespace majperc;
using majperc_test::config_from_rows;

namespace {

// Independent slow oracle: gather every ring in [0,t], globally sort by
// (time, row-major index), apply step_site one by one.
SpinConfig slow_evolve(const SpinConfig& init, const ClockStream& clocks, double t,
                       BoundaryPolicy policy) {
  struct Ev {
    double time;
    std::int64_t idx;
  };
  const Rect& r = init.region();
  std::vector<Ev> evs;
  for (std::int64_t i = 0; i < r.area(); ++i)
    for (double ring : clocks.rings(r.site_at(i), t)) evs.push_back({ring, i});
  std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) {
    return a.time != b.time ? a.time < b.time : a.idx < b.idx;
  });
  SpinConfig cfg = init;
  for (const Ev& ev : evs) {
    Site s = r.site_at(ev.idx);
    cfg.set(s, step_site(cfg, s, policy));
  }
  return cfg;
}

SpinConfig random_config(Rect r, double p, std::uint64_t seed) {
  return random_init(r, p, uniform_field(SeedSpec{seed, 0, "init"}, r));
}

}  // namespace

TEST_CASE("step_site truth table") {
  // own=0, neighbors (1,1,1,0) -> 1
  SpinConfig a = config_from_rows({"010", "101", "010"});
  a.set({1, 0}, true);
  a.set({0, 1}, true);
  a.set({2, 1}, true);
  a.set({1, 2}, false);
  a.set({1, 1}, false);
  CHECK(step_site(a, {1, 1}, BoundaryPolicy::FreeFinite) == true);
  // own=1, neighbors (1,0,0,1) -> tie keeps own
  SpinConfig b(Rect{0, 2, 0, 2});
  b.set({1, 1}, true);
  b.set({1, 0}, true);
  b.set({1, 2}, true);
  CHECK(step_site(b, {1, 1}, BoundaryPolicy::FreeFinite) == true);
  b.set({1, 1}, false);
  CHECK(step_site(b, {1, 1}, BoundaryPolicy::FreeFinite) == false);
  // all-zero config, any site -> 0
  SpinConfig z(Rect{0, 2, 0, 2});
  for (std::int64_t i = 0; i < z.region().area(); ++i)
    CHECK(step_site(z, z.region().site_at(i), BoundaryPolicy::FreeFinite) == false);
  CHECK_THROWS_AS(step_site(z, {9, 9}, BoundaryPolicy::FreeFinite), std::invalid_argument);
}

TEST_CASE("step_site respects boundary policies") {
  SpinConfig cfg = config_from_rows({"10", "01"});
  // corner (0,0) is 1; FreeFinite neighbors (1,0)=0,(0,1)=0 -> majority 0
  CHECK(step_site(cfg, {0, 0}, BoundaryPolicy::FreeFinite) == false);
  // FrozenOne adds two 1-reads: (0,0,1,1) tie -> keep own 1
  CHECK(step_site(cfg, {0, 0}, BoundaryPolicy::FrozenOne) == true);
  CHECK(step_site(cfg, {0, 0}, BoundaryPolicy::FrozenZero) == false);
  // Periodic on 2x2: each wrapped read duplicates the two in-region
  // neighbors, so the striped pattern ties everywhere
  SpinConfig stripes = config_from_rows({"11", "00"});
  for (std::int64_t i = 0; i < 4; ++i) {
    Site s = stripes.region().site_at(i);
    CHECK(step_site(stripes, s, BoundaryPolicy::Periodic) == stripes.get(s));
  }
}

TEST_CASE("step_site is attractive") {
  Rect r{0, 4, 0, 4};
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    UniformField field(SeedSpec{seed, 0, "init"}, r);
    SpinConfig lo = random_init(r, 0.35, field);
    SpinConfig hi = random_init(r, 0.65, field);
    REQUIRE(leq(lo, hi));
    for (BoundaryPolicy policy : {BoundaryPolicy::FreeFinite, BoundaryPolicy::FrozenZero,
                                  BoundaryPolicy::FrozenOne, BoundaryPolicy::Periodic})
      for (std::int64_t i = 0; i < r.area(); ++i) {
        Site s = r.site_at(i);
        CHECK(step_site(lo, s, policy) <= step_site(hi, s, policy));
      }
  }
}

TEST_CASE("evolve_forward matches the sorted-ring replay oracle") {
  Rect r{0, 7, 0, 7};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SpinConfig init = random_config(r, 0.5, seed);
    ClockStream clocks(SeedSpec{seed, 0, "clock"});
    for (double t : {0.4, 1.3}) {
      for (BoundaryPolicy policy :
           {BoundaryPolicy::FreeFinite, BoundaryPolicy::FrozenZero, BoundaryPolicy::Periodic})
        CHECK(evolve_forward(init, clocks, t, policy) == slow_evolve(init, clocks, t, policy));
    }
  }
}

TEST_CASE("evolve_forward basics") {
  Rect r{0, 5, 0, 5};
  SpinConfig init = random_config(r, 0.5, 11);
  ClockStream clocks(SeedSpec{11, 0, "clock"});
  CHECK(evolve_forward(init, clocks, 0.0, BoundaryPolicy::FreeFinite) == init);
  CHECK_THROWS_AS(evolve_forward(init, clocks, -1.0, BoundaryPolicy::FreeFinite),
                  std::invalid_argument);
}

TEST_CASE("a 4-cycle of ones is stable forever") {
  SpinConfig init = config_from_rows({
      "000000",
      "001100",
      "001100",
      "000000",
  });
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ClockStream clocks(SeedSpec{seed, 0, "clock"});
    SpinConfig out = evolve_forward(init, clocks, 8.0, BoundaryPolicy::FreeFinite);
    CHECK(out.get({2, 1}));
    CHECK(out.get({3, 1}));
    CHECK(out.get({2, 2}));
    CHECK(out.get({3, 2}));
  }
}

TEST_CASE("trajectory log replays to the final state") {
  Rect r{0, 7, 0, 7};
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    SpinConfig init = random_config(r, 0.5, seed);
    ClockStream clocks(SeedSpec{seed, 0, "clock"});
    auto [final_cfg, log] = evolve_trajectory(init, clocks, 2.0, BoundaryPolicy::FreeFinite);
    SpinConfig replay = init;
    double prev = -1.0;
    for (const FlipEvent& ev : log) {
      CHECK(ev.time > prev);
      prev = ev.time;
      CHECK(ev.old_value != ev.new_value);
      CHECK(replay.get(ev.site) == ev.old_value);
      replay.set(ev.site, ev.new_value);
    }
    CHECK(replay == final_cfg);
  }
  SpinConfig ones(r);
  ones.fill(true);
  ClockStream clocks(SeedSpec{1, 0, "clock"});
  auto [out, log] = evolve_trajectory(ones, clocks, 3.0, BoundaryPolicy::FreeFinite);
  CHECK(log.empty());
  CHECK(out == ones);
  auto [out0, log0] = evolve_trajectory(random_config(r, 0.5, 5), clocks, 0.0,
                                        BoundaryPolicy::FreeFinite);
  CHECK(log0.empty());
}

TEST_CASE("evolve_forward preserves order under shared clocks") {
  Rect r{0, 9, 0, 9};
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    UniformField field(SeedSpec{seed, 0, "init"}, r);
    SpinConfig lo = random_init(r, 0.4, field);
    SpinConfig hi = random_init(r, 0.6, field);
    ClockStream clocks(SeedSpec{seed, 0, "clock"});
    for (double t : {0.5, 2.0})
      CHECK(leq(evolve_forward(lo, clocks, t, BoundaryPolicy::FreeFinite),
                evolve_forward(hi, clocks, t, BoundaryPolicy::FreeFinite)));
  }
}

TEST_CASE("lazy evaluation agrees exactly with the forward engine") {
  Rect r{-4, 4, -4, 4};
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    UniformField field(SeedSpec{seed, 0, "init"}, r);
    ClockStream clocks(SeedSpec{seed, 0, "clock"});
    for (BoundaryPolicy policy : {BoundaryPolicy::FrozenZero, BoundaryPolicy::FrozenOne}) {
      SpinConfig init = random_init(r, 0.5, field);
      for (double t : {0.0, 0.7, 1.6}) {
        SpinConfig fwd = evolve_forward(init, clocks, t, policy);
        LazyEvaluator<ClockStream> lazy(clocks, field, 0.5, policy);
        for (std::int64_t i = 0; i < r.area(); ++i) {
          Site s = r.site_at(i);
          CHECK(lazy.value_at(s, t) == fwd.get(s));
        }
      }
    }
  }
}

TEST_CASE("lazy evaluation trivial unfoldings") {
  Rect r{-3, 3, -3, 3};
  ClockStream clocks(SeedSpec{909, 0, "clock"});
  UniformField field(SeedSpec{909, 0, "init"}, r);
  SpinConfig init = random_init(r, 0.5, field);

  // a time before any ring at/near s returns the initial opinion
  Site s{0, 0};
  double t0 = clocks.first_ring(s);
  for (Site nb : orthogonal_neighbors(s)) t0 = std::min(t0, clocks.first_ring(nb));
  double t = 0.5 * t0;
  CHECK(evaluate_lazy(s, t, clocks, field, 0.5, BoundaryPolicy::FrozenZero) == init.get(s));

  // one-step unfolding: a single ring at s before t, neighbors silent
  bool found = false;
  for (std::int64_t i = 0; i < r.padded(-1).area() && !found; ++i) {
    Site c = r.padded(-1).site_at(i);
    double r1 = clocks.first_ring(c);
    double window = r1 + clocks.interarrival(c, 1);
    for (Site nb : orthogonal_neighbors(c)) window = std::min(window, clocks.first_ring(nb));
    if (window <= r1) continue;
    found = true;
    double tq = 0.5 * (r1 + window);
    CHECK(evaluate_lazy(c, tq, clocks, field, 0.5, BoundaryPolicy::FrozenZero) ==
          step_site(init, c, BoundaryPolicy::FrozenZero));
  }
  CHECK(found);
}

TEST_CASE("influence sets are cones rooted at the query site") {
  ClockStream clocks(SeedSpec{4242, 0, "clock"});

  // no rings at s up to t -> {s}
  Site s{5, 5};
  double t = 0.5 * clocks.first_ring(s);
  InfluenceSet tiny = influence_set(s, t, clocks);
  CHECK(tiny.members == std::set<Site>{s});
  CHECK(tiny.chebyshev_radius() == 0);

  // one ring at s, none else nearby -> {s} + neighbors
  bool found = false;
  for (int x = -20; x <= 20 && !found; ++x)
    for (int y = -20; y <= 20 && !found; ++y) {
      Site c{x, y};
      double r1 = clocks.first_ring(c);
      double window = r1 + clocks.interarrival(c, 1);
      for (Site nb : orthogonal_neighbors(c)) window = std::min(window, clocks.first_ring(nb));
      if (window <= r1) continue;
      found = true;
      InfluenceSet one = influence_set(c, 0.5 * (r1 + window), clocks);
      std::set<Site> expect{c};
      for (Site nb : orthogonal_neighbors(c)) expect.insert(nb);
      CHECK(one.members == expect);
      CHECK(one.chebyshev_radius() == 1);
    }
  CHECK(found);
}

TEST_CASE("influence sets grow monotonically in t") {
  ClockStream clocks(SeedSpec{31337, 0, "clock"});
  for (int i = 0; i < 10; ++i) {
    Site s{3 * i, -2 * i};
    InfluenceSet a = influence_set(s, 0.4, clocks);
    InfluenceSet b = influence_set(s, 1.0, clocks);
    InfluenceSet c = influence_set(s, 1.8, clocks);
    CHECK(std::includes(b.members.begin(), b.members.end(), a.members.begin(), a.members.end()));
    CHECK(std::includes(c.members.begin(), c.members.end(), b.members.begin(), b.members.end()));
    CHECK(a.members.count(s) == 1);
  }
}

TEST_CASE("cone reach at t=1 stays below the m=25 bound") {
  PadBound pb = evaluate_pad_bound(1.0, 25 - std::ceil(3.0 * std::exp(2.0)));
  REQUIRE(pb.m == 25);
  int n = 400, hits = 0;
  for (int i = 0; i < n; ++i) {
    ClockStream clocks(SeedSpec{9000 + static_cast<std::uint64_t>(i), 0, "clock"});
    if (influence_set({0, 0}, 1.0, clocks).chebyshev_radius() >= 25) ++hits;
  }
  // the evaluated bound is far below 1/n, so the empirical rate (which it
  // dominates) must be zero here
  REQUIRE(pb.bound < 1.0 / n);
  CHECK(hits == 0);
}

TEST_CASE("pad bound evaluation follows the radius formula") {
  PadBound p0 = evaluate_pad_bound(1.0, 0.0);
  CHECK(p0.m == 23);  // ceil(3 e^2) with 3e^2 ~ 22.17
  CHECK(evaluate_pad_bound(2.0, 0.0).m == static_cast<int>(std::ceil(6.0 * std::exp(2.0))));
  // explicit e^{-u} factor: one unit of slack gains at least a factor e
  double b10 = evaluate_pad_bound(1.0, 10.0).bound;
  double b11 = evaluate_pad_bound(1.0, 11.0).bound;
  CHECK(b10 / b11 >= std::exp(1.0) * 0.999);
  // non-increasing in u
  double prev = 2.0;
  for (int u = 0; u <= 30; ++u) {
    double b = evaluate_pad_bound(0.5, u).bound;
    CHECK(b <= prev);
    prev = b;
  }
  // tiny t, huge m: the bound caps at probabilities, never above 1
  CHECK(evaluate_pad_bound(1e-9, 0.0).bound <= 1.0);
}

TEST_CASE("pad_radius finds the smallest adequate slack") {
  CHECK(pad_radius(1.0, 1.0).u == 0.0);
  CHECK(pad_radius(1.0, 2.0).m == 23);
  for (double eps : {1e-3, 1e-6, 1e-9}) {
    PadBound pb = pad_radius(1.0, eps);
    CHECK(pb.bound <= eps);
    if (pb.u > 0) CHECK(evaluate_pad_bound(1.0, pb.u - 1).bound > eps);
  }
  CHECK_THROWS_AS(pad_radius(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("quiescence detection") {
  Rect r{0, 7, 0, 7};
  ClockStream clocks(SeedSpec{2, 0, "clock"});

  SpinConfig ones(r);
  ones.fill(true);
  auto all1 = run_to_quiescence(ones, clocks, BoundaryPolicy::FreeFinite, 100.0);
  REQUIRE(all1.quiescence_time.has_value());
  CHECK(*all1.quiescence_time == 0.0);
  CHECK(all1.final_config == ones);

  // striped 2x2 torus: every update is a tie-keep, quiescent at 0
  SpinConfig stripes = config_from_rows({"11", "00"});
  ClockStream tiny_clocks(SeedSpec{3, 0, "clock"});
  auto tie = run_to_quiescence(stripes, tiny_clocks, BoundaryPolicy::Periodic, 100.0);
  REQUIRE(tie.quiescence_time.has_value());
  CHECK(*tie.quiescence_time == 0.0);
  CHECK(tie.final_config == stripes);

  // random instance reaches an absorbing state; final is a fixed point
  SpinConfig init = random_config(r, 0.5, 17);
  auto q = run_to_quiescence(init, clocks, BoundaryPolicy::FreeFinite, 1000.0);
  REQUIRE(q.quiescence_time.has_value());
  for (std::int64_t i = 0; i < r.area(); ++i) {
    Site s = r.site_at(i);
    CHECK(step_site(q.final_config, s, BoundaryPolicy::FreeFinite) == q.final_config.get(s));
  }
  // quiescent configs are fixed points of the dynamics itself
  CHECK(evolve_forward(q.final_config, clocks, *q.quiescence_time + 25.0,
                       BoundaryPolicy::FreeFinite) == q.final_config);
  // flip counts match an independent trajectory of the same randomness
  auto [final_cfg, log] = evolve_trajectory(init, clocks, *q.quiescence_time,
                                            BoundaryPolicy::FreeFinite);
  CHECK(final_cfg == q.final_config);
  std::vector<std::uint32_t> counts(r.area(), 0);
  for (const FlipEvent& ev : log) ++counts[r.index_of(ev.site)];
  CHECK(counts == q.flip_counts);

  CHECK_THROWS_AS(run_to_quiescence(init, clocks, BoundaryPolicy::FreeFinite, 0.0),
                  std::invalid_argument);
}

TEST_CASE("forward engine start_time offset splices phases exactly") {
  Rect r{0, 9, 0, 9};
  SpinConfig init = random_config(r, 0.5, 23);
  ClockStream clocks(SeedSpec{23, 0, "clock"});
  // one engine straight to t=2
  SpinConfig direct = evolve_forward(init, clocks, 2.0, BoundaryPolicy::FreeFinite);
  // two engines spliced at t=0.8 over the same clock field
  ForwardEngine<ClockStream> first(init, clocks, BoundaryPolicy::FreeFinite);
  first.run_until(0.8);
  ForwardEngine<ClockStream> second(first.config(), clocks, BoundaryPolicy::FreeFinite, 0.8);
  second.run_until(2.0);
  CHECK(second.config() == direct);
}
