#pragma once

// Monte Carlo measurement layer: event probabilities with Wilson
// intervals, threshold search for the finite-size p_c(t) proxy,
// covariance decay, the finite-size percolation certificate, and the
// renormalization inequality trace.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "majperc/dynamics.hpp"
#include "majperc/grid.hpp"
#include "majperc/parallel.hpp"
#include "majperc/percolation.hpp"

namespace majperc {

struct WilsonInterval {
  double lo = 0, hi = 1;
};

inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = 1.959963984540054) {
  if (n == 0) return {0, 1};
  double ph = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (ph + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

enum class EventKind { HCrossing, Circuit, Connects };

struct EventSpec {
  EventKind kind = EventKind::HCrossing;
  Rect window{1, 1, 1, 1};   // event support; padding is added around it
  int inner = 0, outer = 0;  // circuit annulus radii
  std::vector<Site> A, B;    // connects endpoints
  double t = 0;
  double p = 0.5;
  BoundaryPolicy policy = BoundaryPolicy::FrozenZero;
  PadBound pad;  // ignored (no padding) under FreeFinite/Periodic
};

// Default error budget: total-variation slack 1e-6 split over the window
// boundary, per the cone-of-light bound.
inline PadBound default_pad(double t, const Rect& window) {
  double boundary = 2.0 * (window.width() + window.height());
  return pad_radius(t, 1e-6 / boundary);
}

inline EventSpec h_crossing_spec(int n, double lambda, double t, double p,
                                 BoundaryPolicy policy = BoundaryPolicy::FrozenZero) {
  EventSpec s;
  s.kind = EventKind::HCrossing;
  s.window = Rect{1, std::max(1, static_cast<int>(lambda * n)), 1, n};
  s.t = t;
  s.p = p;
  s.policy = policy;
  s.pad = default_pad(t, s.window);
  return s;
}

inline EventSpec circuit_spec(int m, int n, double t, double p) {
  EventSpec s;
  s.kind = EventKind::Circuit;
  s.window = Rect{-n, n, -n, n};
  s.inner = m;
  s.outer = n;
  s.t = t;
  s.p = p;
  s.pad = default_pad(t, s.window);
  return s;
}

inline Rect simulation_region(const EventSpec& spec) {
  if (spec.policy == BoundaryPolicy::FreeFinite || spec.policy == BoundaryPolicy::Periodic)
    return spec.window;
  return spec.t > 0 ? spec.window.padded(spec.pad.m) : spec.window;
}

// One replica of the event indicator; all randomness derives from
// (master_seed, replica_id).
inline bool simulate_event_replica(const EventSpec& spec, std::uint64_t master_seed,
                                   std::uint32_t replica_id) {
  Rect region = simulation_region(spec);
  SeedSpec init_seed{master_seed, replica_id, "init"};
  SpinConfig cfg = random_init(region, spec.p, uniform_field(init_seed, region));
  if (spec.t > 0) {
    ClockStream clocks(SeedSpec{master_seed, replica_id, "clock"});
    cfg = evolve_forward(cfg, clocks, spec.t, spec.policy);
  }
  switch (spec.kind) {
    case EventKind::HCrossing:
      return has_h_crossing(cfg, spec.window);
    case EventKind::Circuit:
      return has_circuit(cfg, spec.inner, spec.outer);
    case EventKind::Connects:
      return connects(cfg, spec.window, spec.A, spec.B, Connectivity::NearestNeighbor);
  }
  return false;
}

struct EventProbEstimate {
  EventSpec spec;
  std::uint64_t replicas = 0;
  std::uint64_t successes = 0;
  double p_hat = 0;
  WilsonInterval ci;
  std::uint64_t master_seed = 0;
  std::uint32_t first_replica = 0;  // replica ids are [first, first+replicas)
};

inline EventProbEstimate mc_event_prob(const EventSpec& spec, std::uint64_t replicas,
                                       std::uint64_t master_seed,
                                       std::uint32_t first_replica = 0) {
  if (replicas < 1) throw std::invalid_argument("mc_event_prob: replicas must be >= 1");
  std::vector<char> hits(replicas);
  parallel_for(replicas, [&](std::uint64_t i) {
    hits[i] = simulate_event_replica(spec, master_seed, first_replica + static_cast<std::uint32_t>(i));
  });
  EventProbEstimate est;
  est.spec = spec;
  est.replicas = replicas;
  for (char h : hits) est.successes += h;
  est.p_hat = static_cast<double>(est.successes) / replicas;
  est.ci = wilson_interval(est.successes, replicas);
  est.master_seed = master_seed;
  est.first_replica = first_replica;
  return est;
}

// ---------------------------------------------------------------------
// Threshold search
// ---------------------------------------------------------------------

struct ThresholdTraceRow {
  double p = 0;
  std::uint64_t replicas = 0;
  std::uint64_t successes = 0;
  double p_hat = 0;
  double ci_lo = 0, ci_hi = 0;
  char decision = '?';  // '<' target, '>' target, '?' budget-limited
};

struct ThresholdEstimate {
  double t = 0;
  int n = 0;
  double lambda = 2;
  double target = 0.5;
  double p_star = 0;
  double ci_lo = 0, ci_hi = 1;  // final bisection bracket
  std::uint64_t replicas_used = 0;
  bool budget_exhausted = false;
  std::vector<ThresholdTraceRow> trace;
};

struct ThresholdOptions {
  double tol = 0.004;                    // bracket width at termination
  std::uint64_t initial_batch = 256;     // doubled while the CI straddles target
  std::uint64_t max_replicas_per_point = 65536;
  double p_lo = 0.0, p_hi = 1.0;
};

// Bisection on p for P[H(lambda*n, n)] = target, with sequential doubling
// batches per point. Replica seeds are shared across p values, so the
// per-replica indicators are coupled and monotone in p.
inline ThresholdEstimate threshold_search(double t, int n, double lambda, double target,
                                          std::uint64_t master_seed,
                                          const ThresholdOptions& opts = {}) {
  if (!(opts.tol > 0)) throw std::invalid_argument("threshold_search: tol must be positive");
  ThresholdEstimate est;
  est.t = t;
  est.n = n;
  est.lambda = lambda;
  est.target = target;
  double lo = opts.p_lo, hi = opts.p_hi;
  while (hi - lo > opts.tol) {
    double mid = 0.5 * (lo + hi);
    EventSpec spec = h_crossing_spec(n, lambda, t, mid);
    std::uint64_t used = 0, successes = 0;
    std::uint64_t batch = opts.initial_batch;
    WilsonInterval ci{0, 1};
    while (true) {
      batch = std::min(batch, opts.max_replicas_per_point - used);
      if (batch == 0) break;
      EventProbEstimate e = mc_event_prob(spec, batch, master_seed, static_cast<std::uint32_t>(used));
      used += e.replicas;
      successes += e.successes;
      ci = wilson_interval(successes, used);
      if (ci.lo > target || ci.hi < target) break;
      batch = used;  // double
    }
    ThresholdTraceRow row;
    row.p = mid;
    row.replicas = used;
    row.successes = successes;
    row.p_hat = static_cast<double>(successes) / used;
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    est.replicas_used += used;
    if (ci.lo > target) {
      row.decision = '>';
      hi = mid;
    } else if (ci.hi < target) {
      row.decision = '<';
      lo = mid;
    } else {
      row.decision = '?';
      est.budget_exhausted = true;
      if (row.p_hat > target)
        hi = mid;
      else
        lo = mid;
    }
    est.trace.push_back(row);
  }
  est.ci_lo = lo;
  est.ci_hi = hi;
  est.p_star = 0.5 * (lo + hi);
  return est;
}

// Independent cross-check estimator: bisection on p for
// E[largest cluster fraction of the n x n window] = theta_target.
struct LcfThresholdOptions {
  double tol = 0.004;
  std::uint64_t replicas = 2048;
  double p_lo = 0.0, p_hi = 1.0;
};

inline double largest_cluster_fraction_replica(int n, double t, double p,
                                               std::uint64_t master_seed,
                                               std::uint32_t replica_id) {
  EventSpec spec;  // reuse geometry/padding conventions
  spec.window = Rect{1, n, 1, n};
  spec.t = t;
  spec.p = p;
  spec.pad = t > 0 ? default_pad(t, spec.window) : PadBound{};
  Rect region = simulation_region(spec);
  SpinConfig cfg = random_init(region, p, uniform_field(SeedSpec{master_seed, replica_id, "init"}, region));
  if (t > 0) {
    ClockStream clocks(SeedSpec{master_seed, replica_id, "clock"});
    cfg = evolve_forward(cfg, clocks, t, spec.policy);
  }
  // restrict to the window before clustering
  SpinConfig win(spec.window);
  for (int y = spec.window.y0; y <= spec.window.y1; ++y)
    for (int x = spec.window.x0; x <= spec.window.x1; ++x)
      win.set({x, y}, cfg.get({x, y}));
  return static_cast<double>(largest_cluster_size(win)) / spec.window.area();
}

inline ThresholdEstimate lcf_threshold_search(double t, int n, double theta_target,
                                              std::uint64_t master_seed,
                                              const LcfThresholdOptions& opts = {}) {
  ThresholdEstimate est;
  est.t = t;
  est.n = n;
  est.lambda = 1;
  est.target = theta_target;
  double lo = opts.p_lo, hi = opts.p_hi;
  while (hi - lo > opts.tol) {
    double mid = 0.5 * (lo + hi);
    std::vector<double> fr(opts.replicas);
    parallel_for(opts.replicas, [&](std::uint64_t i) {
      fr[i] = largest_cluster_fraction_replica(n, t, mid, master_seed, static_cast<std::uint32_t>(i));
    });
    double mean = 0;
    for (double f : fr) mean += f;
    mean /= opts.replicas;
    double var = 0;
    for (double f : fr) var += (f - mean) * (f - mean);
    var /= (opts.replicas - 1);
    double se = std::sqrt(var / opts.replicas);
    ThresholdTraceRow row;
    row.p = mid;
    row.replicas = opts.replicas;
    row.p_hat = mean;
    row.ci_lo = mean - 1.96 * se;
    row.ci_hi = mean + 1.96 * se;
    row.decision = mean > theta_target ? '>' : '<';
    est.replicas_used += opts.replicas;
    if (mean > theta_target)
      hi = mid;
    else
      lo = mid;
    est.trace.push_back(row);
  }
  est.ci_lo = lo;
  est.ci_hi = hi;
  est.p_star = 0.5 * (lo + hi);
  return est;
}

// ---------------------------------------------------------------------
// Covariance decay
// ---------------------------------------------------------------------

struct CovarianceEstimate {
  double cov_hat = 0;
  double ci_lo = 0, ci_hi = 0;
  std::uint64_t replicas = 0;
};

inline CovarianceEstimate covariance_estimate(double p, double t, Site x, Site y,
                                              std::uint64_t replicas, std::uint64_t master_seed) {
  if (replicas < 2) throw std::invalid_argument("covariance_estimate: replicas must be >= 2");
  Rect box{std::min(x.x, y.x), std::max(x.x, y.x), std::min(x.y, y.y), std::max(x.y, y.y)};
  int m = t > 0 ? default_pad(t, box).m : 0;
  Rect region = box.padded(std::max(1, m));
  std::vector<std::pair<char, char>> obs(replicas);
  parallel_for(replicas, [&](std::uint64_t i) {
    auto rid = static_cast<std::uint32_t>(i);
    UniformField field(SeedSpec{master_seed, rid, "init"}, region);
    if (t == 0) {
      obs[i] = {field.at(x) <= p, field.at(y) <= p};
      return;
    }
    ClockStream clocks(SeedSpec{master_seed, rid, "clock"});
    LazyEvaluator<ClockStream> ev(clocks, field, p, BoundaryPolicy::FrozenZero);
    obs[i] = {ev.value_at(x, t), ev.value_at(y, t)};
  });
  double mx = 0, my = 0;
  for (auto& [a, b] : obs) {
    mx += a;
    my += b;
  }
  mx /= replicas;
  my /= replicas;
  double sum = 0, sumsq = 0;
  for (auto& [a, b] : obs) {
    double v = (a - mx) * (b - my);
    sum += v;
    sumsq += v * v;
  }
  CovarianceEstimate out;
  out.replicas = replicas;
  out.cov_hat = sum / (replicas - 1);
  double var_of_products = (sumsq - sum * sum / replicas) / (replicas - 1);
  double se = std::sqrt(var_of_products / replicas);
  out.ci_lo = out.cov_hat - 1.96 * se;
  out.ci_hi = out.cov_hat + 1.96 * se;
  return out;
}

// ---------------------------------------------------------------------
// Percolation certificate and renormalization trace
// ---------------------------------------------------------------------

inline constexpr double kCertificateEpsilon = 1.0 / (4.0 * 14.0 * 14.0);

struct CertificateReport {
  double p = 0, t = 0;
  int n = 0;
  int n0_proxy = 0;          // configured stand-in for the minimal certified scale
  double decoupling_c = 1;   // configured stand-in for the decoupling constant
  std::uint64_t replicas = 0;
  std::uint64_t failures = 0;  // H(4n,n) did not occur
  double q_hat = 0;
  double q_upper = 0;  // 95% Wilson upper bound
  double epsilon = kCertificateEpsilon;
  double recursion_prediction = 0;  // 14^2 (q^2 + 100 c L^2 e^{-L}) at measured q
  bool certified = false;
  std::uint64_t master_seed = 0;
};

struct CertificateOptions {
  std::uint64_t replicas = 4096;
  int n0_proxy = 16;
  double max_t = 16.0;      // configured T bound
  double decoupling_c = 1;  // stand-in constant, echoed not asserted
};

inline CertificateReport percolation_certificate(double p, double t, int n,
                                                 std::uint64_t master_seed,
                                                 const CertificateOptions& opts = {}) {
  if (n < opts.n0_proxy)
    throw std::invalid_argument("percolation_certificate: n below configured n0 proxy");
  if (t > opts.max_t) throw std::invalid_argument("percolation_certificate: t above configured T");
  EventSpec spec = h_crossing_spec(n, 4.0, t, p);
  EventProbEstimate e = mc_event_prob(spec, opts.replicas, master_seed);
  CertificateReport r;
  r.p = p;
  r.t = t;
  r.n = n;
  r.n0_proxy = opts.n0_proxy;
  r.decoupling_c = opts.decoupling_c;
  r.replicas = e.replicas;
  r.failures = e.replicas - e.successes;
  r.q_hat = static_cast<double>(r.failures) / r.replicas;
  r.q_upper = wilson_interval(r.failures, r.replicas).hi;
  double L = n;
  r.recursion_prediction = 196.0 * (r.q_hat * r.q_hat + 100.0 * opts.decoupling_c * L * L * std::exp(-L));
  r.certified = r.q_upper < r.epsilon;
  r.master_seed = master_seed;
  return r;
}

struct RenormRow {
  int k = 0;
  int L = 0;
  std::uint64_t replicas = 0;
  std::uint64_t failures = 0;
  double q_hat = 0;
  double ci_lo = 0, ci_hi = 0;
  double bound_from_prev = 0;  // factor^2 * (q_{k-1}^2 + correction); NaN at k=0
  bool bound_satisfied = true;
};

struct RenormOptions {
  std::uint64_t replicas = 2048;
  double decoupling_c = 1;
  std::int64_t max_window_area = 100'000'000;
};

// Measures hard-crossing failure probabilities along L_{k+1} = factor*L_k
// and reports them against the recursion bound
//   q_{k+1} <= 49 (q_k^2 + 64 c L_k^2 e^{-L_k/2})        (factor 3)
//   q_{k+1} <= 196 (q_k^2 + 100 c L_k^2 e^{-L_k})        (factor 4)
inline std::vector<RenormRow> renorm_trace(double p, double t, int L0, int factor, int k_max,
                                           std::uint64_t master_seed,
                                           const RenormOptions& opts = {}) {
  if (factor != 3 && factor != 4) throw std::invalid_argument("renorm_trace: factor must be 3 or 4");
  std::vector<RenormRow> rows;
  int L = L0;
  for (int k = 0; k <= k_max; ++k) {
    if (static_cast<std::int64_t>(L) * factor * L > opts.max_window_area)
      throw std::invalid_argument("renorm_trace: window exceeds memory budget");
    EventSpec spec = h_crossing_spec(L, factor, t, p);
    EventProbEstimate e = mc_event_prob(spec, opts.replicas, master_seed + static_cast<std::uint64_t>(k));
    RenormRow row;
    row.k = k;
    row.L = L;
    row.replicas = e.replicas;
    row.failures = e.replicas - e.successes;
    row.q_hat = static_cast<double>(row.failures) / row.replicas;
    WilsonInterval ci = wilson_interval(row.failures, row.replicas);
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    if (k == 0) {
      row.bound_from_prev = std::numeric_limits<double>::quiet_NaN();
    } else {
      const RenormRow& prev = rows.back();
      double Lp = prev.L;
      double corr = factor == 3 ? 64.0 * opts.decoupling_c * Lp * Lp * std::exp(-Lp / 2.0)
                                : 100.0 * opts.decoupling_c * Lp * Lp * std::exp(-Lp);
      double f2 = static_cast<double>(factor == 3 ? 49 : 196);
      row.bound_from_prev = f2 * (prev.q_hat * prev.q_hat + corr);
      row.bound_satisfied = row.q_hat <= row.bound_from_prev;
    }
    rows.push_back(row);
    L *= factor;
  }
  return rows;
}

}  // namespace majperc
