#pragma once

// Checkerboard enhancement experiment: exponential splitting of B-site
// first rings into four pieces, the activation rule on A-sites, the
// single-pass enhanced configuration, and the pathwise chain-stability
// verification.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "majperc/clocks.hpp"
#include "majperc/dynamics.hpp"
#include "majperc/grid.hpp"
#include "majperc/rng.hpp"

namespace majperc {

namespace detail {

// Gamma(shape, 1) via Marsaglia-Tsang with the alpha+1 boost for
// shape < 1; consumes the counter stream under `key` deterministically.
inline double gamma_sample(std::uint64_t key, double shape) {
  double alpha = shape < 1.0 ? shape + 1.0 : shape;
  double d = alpha - 1.0 / 3.0;
  double c = 1.0 / (3.0 * std::sqrt(d));
  std::uint64_t i = 0;
  double x;
  for (;;) {
    double u1 = to_uniform_open(counter_u64(key, i++));
    double u2 = to_uniform_open(counter_u64(key, i++));
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    double v = 1.0 + c * z;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u3 = to_uniform_open(counter_u64(key, i++));
    if (std::log(u3) < 0.5 * z * z + d - d * v + d * std::log(v)) {
      x = d * v;
      break;
    }
  }
  if (shape < 1.0) {
    double u4 = to_uniform_open(counter_u64(key, i++));
    x *= std::pow(u4, 1.0 / shape);
  }
  return x;
}

}  // namespace detail

// Per-site activation data. Each B-site's first ring T_x is DEFINED as
// the sum of its four Gamma(1/4, 1) pieces, one attributed to each
// A-neighbor; each A-site has its own Exp(1) first ring T_y. The clock
// stream is then run in first-ring override mode so the dynamics agrees
// with these T values.
class EnhancementField {
 public:
  EnhancementField(Rect region, SeedSpec seed) : region_(region), seed_(std::move(seed)) {
    if (seed_.purpose != "enh")
      throw std::invalid_argument("EnhancementField: seed purpose must be \"enh\"");
    std::int64_t n = region.area();
    first_ring_.resize(n);
    pieces_.resize(n);
    for (std::int64_t i = 0; i < n; ++i) {
      Site s = region.site_at(i);
      std::uint64_t key = site_key(seed_, s.x, s.y);
      if (parity_class(s) == Parity::B) {
        double sum = 0.0;
        for (int j = 0; j < 4; ++j) {
          double piece = detail::gamma_sample(majperc::detail::mix64(key + j + 1), 0.25);
          pieces_[i][j] = piece;
          sum += piece;
        }
        first_ring_[i] = sum;  // splitting identity is exact by construction
      } else {
        first_ring_[i] = to_exponential(counter_u64(key, 0));
        pieces_[i] = {0, 0, 0, 0};
      }
    }
  }

  const Rect& region() const { return region_; }
  const SeedSpec& seed() const { return seed_; }

  double first_ring(Site s) const { return first_ring_[region_.index_of(s)]; }

  // j-th piece of B-site x, attributed to neighbor x + offset(j)
  double piece(Site x, int j) const {
    if (parity_class(x) != Parity::B)
      throw std::invalid_argument("EnhancementField::piece: not a B-site");
    return pieces_[region_.index_of(x)][j];
  }

  // Piece attributed to A-site y from its B-neighbor x.
  double piece_for(Site y, Site x) const {
    auto offs = orthogonal_neighbors(x);
    for (int j = 0; j < 4; ++j)
      if (offs[j] == y) return piece(x, j);
    throw std::invalid_argument("EnhancementField::piece_for: sites not adjacent");
  }

 private:
  Rect region_;
  SeedSpec seed_;
  std::vector<double> first_ring_;
  std::vector<std::array<double, 4>> pieces_;
};

struct ActivationMask {
  Rect region;
  std::vector<char> activated;  // per site; only interior A-sites can be set

  bool at(Site s) const { return activated[region.index_of(s)]; }
};

// Activated at y iff T_y < t and all four pieces associated to y exceed t.
// Only interior A-sites (all four B-neighbors inside the region) qualify.
inline ActivationMask activation_mask(const EnhancementField& field, double t) {
  if (!(t > 0)) throw std::invalid_argument("activation_mask: t must be positive");
  const Rect& r = field.region();
  ActivationMask mask;
  mask.region = r;
  mask.activated.assign(r.area(), 0);
  for (std::int64_t i = 0; i < r.area(); ++i) {
    Site y = r.site_at(i);
    if (parity_class(y) != Parity::A) continue;
    if (field.first_ring(y) >= t) continue;
    bool ok = true;
    for (Site x : orthogonal_neighbors(y)) {
      if (!r.contains(x)) {
        ok = false;
        break;
      }
      if (field.piece_for(y, x) <= t) {
        ok = false;
        break;
      }
    }
    if (ok) mask.activated[i] = 1;
  }
  return mask;
}

// Single pass: every activated A-site with at least three 1-neighbors in
// the ORIGINAL configuration becomes 1; everything else is unchanged.
inline SpinConfig apply_enhancement(const SpinConfig& config, const ActivationMask& mask) {
  if (config.region() != mask.region)
    throw std::invalid_argument("apply_enhancement: region mismatch");
  SpinConfig out = config;
  const Rect& r = config.region();
  for (std::int64_t i = 0; i < r.area(); ++i) {
    if (!mask.activated[i]) continue;
    Site y = r.site_at(i);
    int ones = 0;
    for (Site x : orthogonal_neighbors(y))
      if (r.contains(x) && config.get(x)) ++ones;
    if (ones >= 3) out.set(y, true);
  }
  return out;
}

struct ChainStabilityReport {
  std::uint64_t chains_checked = 0;
  std::uint64_t chain_sites_checked = 0;
  std::uint64_t connectors_checked = 0;
  std::uint64_t violations = 0;
};

// Pathwise verification of the stability argument. Protected chains are
// maximal horizontal/vertical runs of initially-open sites whose two
// endpoint sites have their first ring after t (interior run sites keep
// two open run-neighbors, so they can never flip). Connectors are
// activated A-sites with >= 3 initially-open neighbors; their neighbors
// never ring before t, so they are 1 at time t. Violations must be zero.
inline ChainStabilityReport chain_stability_check(const SpinConfig& init,
                                                  const ClockStream& clocks,
                                                  const EnhancementField& field, double t,
                                                  BoundaryPolicy policy = BoundaryPolicy::FreeFinite) {
  if (clocks.seed().master_seed != field.seed().master_seed ||
      clocks.seed().replica_id != field.seed().replica_id)
    throw std::invalid_argument("chain_stability_check: field/clock seed mismatch");
  const Rect& r = init.region();
  if (r != field.region())
    throw std::invalid_argument("chain_stability_check: region mismatch");

  auto first = [&field](Site s) { return field.first_ring(s); };
  OverrideFirstRingClock<decltype(first)> clock(clocks, first);
  SpinConfig final_cfg = evolve_forward(init, clock, t, policy);

  ChainStabilityReport rep;
  auto sleeper = [&](Site s) { return field.first_ring(s) > t; };

  auto scan_runs = [&](bool horizontal) {
    int outer_lo = horizontal ? r.y0 : r.x0;
    int outer_hi = horizontal ? r.y1 : r.x1;
    int inner_lo = horizontal ? r.x0 : r.y0;
    int inner_hi = horizontal ? r.x1 : r.y1;
    for (int o = outer_lo; o <= outer_hi; ++o) {
      int start = inner_lo;
      while (start <= inner_hi) {
        auto site = [&](int i) { return horizontal ? Site{i, o} : Site{o, i}; };
        if (!init.get(site(start))) {
          ++start;
          continue;
        }
        int end = start;
        while (end + 1 <= inner_hi && init.get(site(end + 1))) ++end;
        if (sleeper(site(start)) && sleeper(site(end))) {
          ++rep.chains_checked;
          for (int i = start; i <= end; ++i) {
            ++rep.chain_sites_checked;
            if (!final_cfg.get(site(i))) ++rep.violations;
          }
        }
        start = end + 1;
      }
    }
  };
  scan_runs(true);
  scan_runs(false);

  ActivationMask mask = activation_mask(field, t);
  for (std::int64_t i = 0; i < r.area(); ++i) {
    if (!mask.activated[i]) continue;
    Site y = r.site_at(i);
    int ones = 0;
    for (Site x : orthogonal_neighbors(y))
      if (init.get(x)) ++ones;
    if (ones < 3) continue;
    ++rep.connectors_checked;
    if (!final_cfg.get(y)) ++rep.violations;
  }
  return rep;
}

}  // namespace majperc
