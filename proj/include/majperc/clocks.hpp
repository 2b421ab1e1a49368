#pragma once

// Deterministic realization of the per-site Poisson clock field. Ring
// times are partial sums of i.i.d. Exp(1) interarrivals, addressable at
// random by (seed, site, index). Queries implicitly extend the horizon;
// already-generated ring times never change.

#include <optional>
#include <vector>

#include "majperc/grid.hpp"
#include "majperc/rng.hpp"

namespace majperc {

class ClockStream {
 public:
  explicit ClockStream(SeedSpec seed) : seed_(std::move(seed)) {}

  const SeedSpec& seed() const { return seed_; }

  // k-th interarrival (k >= 0) of the site's clock; strictly positive.
  double interarrival(Site s, std::uint64_t k) const {
    return to_exponential(counter_u64(site_key(seed_, s.x, s.y), k));
  }

  double first_ring(Site s) const { return interarrival(s, 0); }

  // All ring times in [0, t], sorted ascending.
  std::vector<double> rings(Site s, double t) const {
    std::vector<double> out;
    double acc = 0.0;
    for (std::uint64_t k = 0;; ++k) {
      acc += interarrival(s, k);
      if (acc > t) break;
      out.push_back(acc);
    }
    return out;
  }

  // Largest ring time strictly before t, if any.
  std::optional<double> last_ring_before(Site s, double t) const {
    std::optional<double> best;
    double acc = 0.0;
    for (std::uint64_t k = 0;; ++k) {
      acc += interarrival(s, k);
      if (acc >= t) break;
      best = acc;
    }
    return best;
  }

  // Number of rings strictly before t, and the time of the last one.
  // One pass shared by the lazy evaluator.
  std::pair<std::uint64_t, double> rings_before(Site s, double t) const {
    std::uint64_t n = 0;
    double acc = 0.0, last = 0.0;
    for (std::uint64_t k = 0;; ++k) {
      acc += interarrival(s, k);
      if (acc >= t) break;
      last = acc;
      ++n;
    }
    return {n, last};
  }

 private:
  SeedSpec seed_;
};

// Clock stream whose first ring per site is overridden by an externally
// supplied time (the enhancement field's T values); later interarrivals
// come from the base stream.
template <class FirstRing>
class OverrideFirstRingClock {
 public:
  OverrideFirstRingClock(ClockStream base, FirstRing first)
      : base_(std::move(base)), first_(std::move(first)) {}

  double interarrival(Site s, std::uint64_t k) const {
    return k == 0 ? first_(s) : base_.interarrival(s, k);
  }

  double first_ring(Site s) const { return first_(s); }

 private:
  ClockStream base_;
  FirstRing first_;
};

}  // namespace majperc
