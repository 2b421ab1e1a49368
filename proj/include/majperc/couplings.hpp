#pragma once

// Order-preserving couplings: density monotonicity under shared
// randomness, and the continuity coupling whose upper marginal carries
// the extra density delta' = (1-p-delta)(1-e^{-delta}).

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "majperc/clocks.hpp"
#include "majperc/dynamics.hpp"
#include "majperc/grid.hpp"

namespace majperc {

struct CoupledPair {
  SpinConfig lower;
  SpinConfig upper;
  double p_lower = 0, p_upper = 0;
  double t = 0;
  double delta = 0, delta_prime = 0;
  std::uint64_t master_seed = 0;
  std::uint32_t replica_id = 0;
  int order_violations = 0;  // any nonzero value falsifies attractiveness
};

inline double continuity_delta_prime(double p, double delta) {
  return (1.0 - p - delta) * (1.0 - std::exp(-delta));
}

// Both marginals carry the correct laws at their densities; the shared
// uniform field and clocks keep lower <= upper pathwise. Strict mode
// checks order after every flip instead of only at the endpoints.
inline CoupledPair monotone_p_pair(double p1, double p2, double t, Rect region,
                                   std::uint64_t master_seed, std::uint32_t replica_id = 0,
                                   BoundaryPolicy policy = BoundaryPolicy::FreeFinite,
                                   bool strict = false) {
  if (p1 > p2) throw std::invalid_argument("monotone_p_pair: need p1 <= p2");
  UniformField field(SeedSpec{master_seed, replica_id, "init"}, region);
  ClockStream clocks(SeedSpec{master_seed, replica_id, "clock"});
  CoupledPair pair;
  pair.p_lower = p1;
  pair.p_upper = p2;
  pair.t = t;
  pair.master_seed = master_seed;
  pair.replica_id = replica_id;
  SpinConfig lo0 = random_init(region, p1, field);
  SpinConfig hi0 = random_init(region, p2, field);
  if (!leq(lo0, hi0)) ++pair.order_violations;
  if (strict && t > 0) {
    auto [lo_final, lo_log] = evolve_trajectory(lo0, clocks, t, policy);
    auto [hi_final, hi_log] = evolve_trajectory(hi0, clocks, t, policy);
    SpinConfig lo = lo0, hi = hi0;
    std::size_t i = 0, j = 0;
    while (i < lo_log.size() || j < hi_log.size()) {
      // a shared ring updates both processes atomically, so all flips
      // carrying the same timestamp are applied before the order check
      double now = std::min(i < lo_log.size() ? lo_log[i].time : hi_log[j].time,
                            j < hi_log.size() ? hi_log[j].time : lo_log[i].time);
      while (i < lo_log.size() && lo_log[i].time == now) {
        lo.set(lo_log[i].site, lo_log[i].new_value);
        ++i;
      }
      while (j < hi_log.size() && hi_log[j].time == now) {
        hi.set(hi_log[j].site, hi_log[j].new_value);
        ++j;
      }
      if (!leq(lo, hi)) ++pair.order_violations;
    }
    pair.lower = std::move(lo_final);
    pair.upper = std::move(hi_final);
  } else {
    pair.lower = t > 0 ? evolve_forward(lo0, clocks, t, policy) : lo0;
    pair.upper = t > 0 ? evolve_forward(hi0, clocks, t, policy) : hi0;
  }
  if (!leq(pair.lower, pair.upper)) ++pair.order_violations;
  return pair;
}

struct ContinuityPair {
  CoupledPair pair;          // lower = xi at t+delta, upper = xibar at t+delta
  SpinConfig upper_at_delta;  // xibar at the phase boundary; marginal is
                              // Bernoulli(p+delta+delta') sitewise i.i.d.
};

// Lower process xi: majority dynamics from Bernoulli(p+delta) run to
// t+delta. Upper process xibar: same init and clocks, but every ring in
// [0,delta] sets the site to 1, then majority dynamics for duration t.
inline ContinuityPair continuity_pair(double p, double delta, double t, Rect region,
                                      std::uint64_t master_seed, std::uint32_t replica_id = 0,
                                      BoundaryPolicy policy = BoundaryPolicy::FreeFinite) {
  if (!(delta > 0)) throw std::invalid_argument("continuity_pair: delta must be positive");
  if (p + delta > 1) throw std::invalid_argument("continuity_pair: p + delta exceeds 1");
  UniformField field(SeedSpec{master_seed, replica_id, "init"}, region);
  ClockStream clocks(SeedSpec{master_seed, replica_id, "clock"});
  SpinConfig init = random_init(region, p + delta, field);

  ContinuityPair out;
  out.pair.p_lower = p + delta;
  out.pair.delta = delta;
  out.pair.delta_prime = continuity_delta_prime(p, delta);
  out.pair.p_upper = p + delta + out.pair.delta_prime;
  out.pair.t = t;
  out.pair.master_seed = master_seed;
  out.pair.replica_id = replica_id;

  // xi through the phase boundary, then to the endpoint
  ForwardEngine<ClockStream> lower_engine(init, clocks, policy);
  lower_engine.run_until(delta);
  SpinConfig xi_delta = lower_engine.config();
  lower_engine.run_until(t + delta);
  out.pair.lower = lower_engine.config();

  // xibar in [0,delta]: a ring sets the site to 1, so the phase-boundary
  // state is init OR "first ring at most delta"
  SpinConfig xibar_delta = init;
  for (int y = region.y0; y <= region.y1; ++y)
    for (int x = region.x0; x <= region.x1; ++x)
      if (clocks.first_ring({x, y}) <= delta) xibar_delta.set({x, y}, true);
  if (!leq(xi_delta, xibar_delta)) ++out.pair.order_violations;
  out.upper_at_delta = xibar_delta;

  ForwardEngine<ClockStream> upper_engine(xibar_delta, clocks, policy, delta);
  upper_engine.run_until(t + delta);
  out.pair.upper = upper_engine.config();
  if (!leq(out.pair.lower, out.pair.upper)) ++out.pair.order_violations;
  return out;
}

}  // namespace majperc
