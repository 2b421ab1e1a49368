#pragma once

// Exact (truncated) law of eta_t on tiny finite graphs. The superposition
// of the n unit-rate clocks is a rate-n Poisson stream with uniform site
// marks, so the law is sum_k P[Poisson(nt)=k] * nu_k, where nu_k is the
// jump-chain distribution after k uniform-site updates. nu_k is evolved
// exactly over all 2^n configurations; all update logic comes from
// step_site.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "majperc/dynamics.hpp"
#include "majperc/grid.hpp"

namespace majperc {

struct ExactLaw {
  Rect region;
  BoundaryPolicy policy = BoundaryPolicy::FreeFinite;
  double t = 0;
  double p = 0;
  int truncation = 0;           // K: ring-count cutoff
  double tail = 0;              // P[Poisson(nt) > K], unassigned mass
  std::vector<double> mass;     // index = config bits, row-major, bit i = site i open
  int n_sites = 0;

  SpinConfig config_of(std::uint32_t bits) const {
    SpinConfig cfg(region);
    for (int i = 0; i < n_sites; ++i)
      if ((bits >> i) & 1u) cfg.set(region.site_at(i), true);
    return cfg;
  }
};

namespace detail {

// P[Poisson(lambda) > K] via the complementary partial sum.
inline double poisson_tail(double lambda, int K) {
  double term = std::exp(-lambda), cum = term;
  for (int k = 1; k <= K; ++k) {
    term *= lambda / k;
    cum += term;
  }
  return std::max(0.0, 1.0 - cum);
}

inline int choose_truncation(double lambda, double eps) {
  int K = static_cast<int>(lambda) + 1;
  while (poisson_tail(lambda, K) >= eps) ++K;
  return K;
}

}  // namespace detail

// K <= 0 picks the smallest truncation with tail < 1e-6.
inline ExactLaw exact_law(Rect region, BoundaryPolicy policy, double t, double p, int K = 0) {
  std::int64_t n = region.area();
  if (n > 9) throw std::invalid_argument("exact_law: more than 9 sites");
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("exact_law: p outside [0,1]");
  if (t < 0) throw std::invalid_argument("exact_law: negative time");
  double lambda = n * t;
  if (K <= 0) K = t == 0 ? 0 : detail::choose_truncation(lambda, 1e-6);
  if (static_cast<double>(K) * (1 << n) * n > 1e10)
    throw std::invalid_argument("exact_law: truncation budget exceeded");

  std::uint32_t nconf = 1u << n;
  // transition table via the dynamics module's update rule
  std::vector<std::uint32_t> next(static_cast<std::size_t>(nconf) * n);
  {
    ExactLaw scratch;
    scratch.region = region;
    scratch.n_sites = static_cast<int>(n);
    for (std::uint32_t c = 0; c < nconf; ++c) {
      SpinConfig cfg = scratch.config_of(c);
      for (int i = 0; i < n; ++i) {
        bool v = step_site(cfg, region.site_at(i), policy);
        next[static_cast<std::size_t>(c) * n + i] = (c & ~(1u << i)) | (static_cast<std::uint32_t>(v) << i);
      }
    }
  }

  std::vector<double> nu(nconf, 0.0), nu_next(nconf);
  for (std::uint32_t c = 0; c < nconf; ++c) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) w *= ((c >> i) & 1u) ? p : 1.0 - p;
    nu[c] = w;
  }

  ExactLaw law;
  law.region = region;
  law.policy = policy;
  law.t = t;
  law.p = p;
  law.truncation = K;
  law.n_sites = static_cast<int>(n);
  law.mass.assign(nconf, 0.0);
  law.tail = detail::poisson_tail(lambda, K);

  double pois = std::exp(-lambda);  // P[Poisson(lambda) = k], k = 0
  for (int k = 0;; ++k) {
    for (std::uint32_t c = 0; c < nconf; ++c) law.mass[c] += pois * nu[c];
    if (k == K) break;
    std::fill(nu_next.begin(), nu_next.end(), 0.0);
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::uint32_t c = 0; c < nconf; ++c) {
      if (nu[c] == 0.0) continue;
      double w = nu[c] * inv_n;
      const std::uint32_t* row = &next[static_cast<std::size_t>(c) * n];
      for (int i = 0; i < n; ++i) nu_next[row[i]] += w;
    }
    nu.swap(nu_next);
    pois *= lambda / (k + 1);
  }
  return law;
}

using ConfigPredicate = std::function<bool(const SpinConfig&)>;

// (lower, upper): truncated mass of the event and its tail-corrected cap.
inline std::pair<double, double> oracle_event_prob(const ExactLaw& law,
                                                   const ConfigPredicate& event) {
  double lower = 0.0;
  for (std::uint32_t c = 0; c < law.mass.size(); ++c)
    if (law.mass[c] > 0.0 && event(law.config_of(c))) lower += law.mass[c];
  return {lower, lower + law.tail};
}

// Exhaustive monotonicity scan over the config lattice (single-bit covers
// suffice by transitivity).
inline bool is_increasing_event(const ExactLaw& law, const ConfigPredicate& event) {
  std::uint32_t nconf = 1u << law.n_sites;
  std::vector<char> truth(nconf);
  for (std::uint32_t c = 0; c < nconf; ++c) truth[c] = event(law.config_of(c));
  for (std::uint32_t c = 0; c < nconf; ++c) {
    if (!truth[c]) continue;
    for (int i = 0; i < law.n_sites; ++i)
      if (!((c >> i) & 1u) && !truth[c | (1u << i)]) return false;
  }
  return true;
}

struct FkgReport {
  double p_a_lower = 0, p_a_upper = 0;
  double p_b_lower = 0, p_b_upper = 0;
  double p_ab_lower = 0, p_ab_upper = 0;
  double margin_lower = 0;  // rigorous lower bound on P[A&B] - P[A]P[B]
  double tail = 0;
  bool pass = false;
};

inline FkgReport oracle_fkg_check(const ExactLaw& law, const ConfigPredicate& A,
                                  const ConfigPredicate& B) {
  if (!is_increasing_event(law, A) || !is_increasing_event(law, B))
    throw std::invalid_argument("oracle_fkg_check: event is not increasing");
  FkgReport r;
  r.tail = law.tail;
  std::tie(r.p_a_lower, r.p_a_upper) = oracle_event_prob(law, A);
  std::tie(r.p_b_lower, r.p_b_upper) = oracle_event_prob(law, B);
  auto ab = [&](const SpinConfig& c) { return A(c) && B(c); };
  std::tie(r.p_ab_lower, r.p_ab_upper) = oracle_event_prob(law, ab);
  r.margin_lower = r.p_ab_lower - r.p_a_upper * r.p_b_upper;
  r.pass = r.margin_lower >= -3.0 * law.tail;
  return r;
}

}  // namespace majperc
