#pragma once

// Majority dynamics: event-driven forward evolution, lazy backward
// evaluation, influence sets, pad sizing and quiescence detection.

#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "majperc/clocks.hpp"
#include "majperc/grid.hpp"

namespace majperc {

struct FlipEvent {
  double time;
  Site site;
  bool old_value;
  bool new_value;
};

// One update of the generator: strict majority of the neighbor opinions,
// ties keep the site's own opinion. Pure.
inline bool step_site(const SpinConfig& config, Site s, BoundaryPolicy policy) {
  const Rect& region = config.region();
  if (!region.contains(s)) throw std::invalid_argument("step_site: site outside region");
  int sum = 0, deg = 0;
  for (Site n : orthogonal_neighbors(s)) {
    if (region.contains(n)) {
      sum += config.get(n);
      ++deg;
      continue;
    }
    switch (policy) {
      case BoundaryPolicy::FreeFinite:
        break;
      case BoundaryPolicy::FrozenZero:
        ++deg;
        break;
      case BoundaryPolicy::FrozenOne:
        ++sum;
        ++deg;
        break;
      case BoundaryPolicy::Periodic:
        sum += config.get(config.wrap(n));
        ++deg;
        break;
    }
  }
  if (2 * sum > deg) return true;
  if (2 * sum < deg) return false;
  return config.get(s);
}

namespace detail {

struct RingEvent {
  double time;
  std::int32_t idx;  // row-major region index; also the tie-break
  std::uint32_t k;   // ring counter at the site
};

struct RingEventLater {
  bool operator()(const RingEvent& a, const RingEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.idx > b.idx;
  }
};

}  // namespace detail

// Event-driven engine over a finite region. Processes rings in global
// time order with the deterministic site tie-break.
template <class Clock>
class ForwardEngine {
 public:
  // `init` is the configuration at `start_time`; rings at times <=
  // start_time are consumed without effect so the clock field is shared
  // across phases.
  ForwardEngine(SpinConfig init, const Clock& clock, BoundaryPolicy policy,
                double start_time = 0.0)
      : cfg_(std::move(init)), clock_(clock), policy_(policy), now_(start_time) {
    const Rect& r = cfg_.region();
    for (std::int64_t i = 0; i < r.area(); ++i) {
      Site s = r.site_at(i);
      double acc = clock_.interarrival(s, 0);
      std::uint32_t k = 0;
      while (acc <= start_time) acc += clock_.interarrival(s, ++k);
      queue_.push({acc, static_cast<std::int32_t>(i), k});
    }
  }

  // Advance to time t; optionally log flips.
  void run_until(double t, std::vector<FlipEvent>* log = nullptr) {
    const Rect& r = cfg_.region();
    while (!queue_.empty() && queue_.top().time <= t) {
      detail::RingEvent ev = queue_.top();
      queue_.pop();
      Site s = r.site_at(ev.idx);
      bool v = step_site(cfg_, s, policy_);
      if (v != cfg_.get(s)) {
        if (log) log->push_back({ev.time, s, !v, v});
        cfg_.set(s, v);
        ++flips_;
      }
      queue_.push({ev.time + clock_.interarrival(s, ev.k + 1), ev.idx, ev.k + 1});
      now_ = ev.time;
    }
    now_ = t;
  }

  // Run until the configuration is quiescent (no site would change) or
  // until t_max. Maintains the unstable set incrementally so large-t runs
  // skip the no-op tail.
  std::optional<double> run_to_quiescence(double t_max, std::vector<std::uint32_t>* flip_counts) {
    const Rect& r = cfg_.region();
    std::vector<char> unstable(r.area(), 0);
    std::int64_t n_unstable = 0;
    for (std::int64_t i = 0; i < r.area(); ++i) {
      Site s = r.site_at(i);
      if (step_site(cfg_, s, policy_) != cfg_.get(s)) {
        unstable[i] = 1;
        ++n_unstable;
      }
    }
    if (flip_counts) flip_counts->assign(r.area(), 0);
    double last_flip = 0.0;
    while (n_unstable > 0 && !queue_.empty() && queue_.top().time <= t_max) {
      detail::RingEvent ev = queue_.top();
      queue_.pop();
      Site s = r.site_at(ev.idx);
      queue_.push({ev.time + clock_.interarrival(s, ev.k + 1), ev.idx, ev.k + 1});
      now_ = ev.time;
      if (!unstable[ev.idx]) continue;
      bool v = step_site(cfg_, s, policy_);
      cfg_.set(s, v);
      ++flips_;
      last_flip = ev.time;
      if (flip_counts) ++(*flip_counts)[ev.idx];
      unstable[ev.idx] = 0;
      --n_unstable;
      for (Site n : orthogonal_neighbors(s)) {
        Site rn = n;
        if (!r.contains(n)) {
          if (policy_ != BoundaryPolicy::Periodic) continue;
          rn = cfg_.wrap(n);
        }
        std::int64_t ni = r.index_of(rn);
        char u = step_site(cfg_, rn, policy_) != cfg_.get(rn);
        n_unstable += u - unstable[ni];
        unstable[ni] = u;
      }
      // a flip can re-destabilize the site itself (tie bookkeeping)
      char u = step_site(cfg_, s, policy_) != cfg_.get(s);
      n_unstable += u - unstable[ev.idx];
      unstable[ev.idx] = u;
    }
    if (n_unstable == 0) return flips_ == 0 ? 0.0 : last_flip;
    return std::nullopt;  // timed out
  }

  const SpinConfig& config() const { return cfg_; }
  std::uint64_t flips() const { return flips_; }

 private:
  SpinConfig cfg_;
  const Clock& clock_;
  BoundaryPolicy policy_;
  std::priority_queue<detail::RingEvent, std::vector<detail::RingEvent>, detail::RingEventLater> queue_;
  std::uint64_t flips_ = 0;
  double now_ = 0.0;
};

template <class Clock>
SpinConfig evolve_forward(const SpinConfig& init, const Clock& clocks, double t,
                          BoundaryPolicy policy) {
  if (t < 0) throw std::invalid_argument("evolve_forward: negative time");
  if (t == 0) return init;
  ForwardEngine<Clock> engine(init, clocks, policy);
  engine.run_until(t);
  return engine.config();
}

template <class Clock>
std::pair<SpinConfig, std::vector<FlipEvent>> evolve_trajectory(
    const SpinConfig& init, const Clock& clocks, double t, BoundaryPolicy policy) {
  if (t < 0) throw std::invalid_argument("evolve_trajectory: negative time");
  std::vector<FlipEvent> log;
  if (t == 0) return {init, log};
  ForwardEngine<Clock> engine(init, clocks, policy);
  engine.run_until(t, &log);
  return {engine.config(), std::move(log)};
}

struct QuiescenceResult {
  SpinConfig final_config;
  std::optional<double> quiescence_time;  // nullopt means timed out at t_max
  std::vector<std::uint32_t> flip_counts;
};

template <class Clock>
QuiescenceResult run_to_quiescence(const SpinConfig& init, const Clock& clocks,
                                   BoundaryPolicy policy, double t_max) {
  if (t_max <= 0) throw std::invalid_argument("run_to_quiescence: t_max must be positive");
  ForwardEngine<Clock> engine(init, clocks, policy);
  std::vector<std::uint32_t> counts;
  auto qt = engine.run_to_quiescence(t_max, &counts);
  return {engine.config(), qt, std::move(counts)};
}

// ---------------------------------------------------------------------
// Pad sizing from the cone-of-light bound
// ---------------------------------------------------------------------

// Radius bound with slack u: m = ceil(3 e^2 t + u) and
// bound = min(1, 4 * 3^m * e^{-t} * sum_{k>=m} t^k/k!).
struct PadBound {
  double t = 0;
  double u = 0;
  int m = 0;
  double bound = 1;
};

namespace detail {

// log of sum_{k>=m} t^k/k!, evaluated stably; -inf when empty.
inline double log_poisson_tail_sum(double t, int m) {
  if (t == 0.0) return m == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  double lg0 = m * std::log(t) - std::lgamma(m + 1.0);
  double rel = 1.0, total = 0.0;
  for (int j = 0;; ++j) {
    total += rel;
    rel *= t / (m + j + 1);
    if (rel < 1e-18 * total && m + j > t) break;
  }
  return lg0 + std::log(total);
}

}  // namespace detail

inline PadBound evaluate_pad_bound(double t, double u) {
  PadBound pb;
  pb.t = t;
  pb.u = u;
  pb.m = static_cast<int>(std::ceil(3.0 * std::exp(2.0) * t + u));
  double lb = pb.m * std::log(3.0) + std::log(4.0) - t + detail::log_poisson_tail_sum(t, pb.m);
  pb.bound = lb >= 0.0 ? 1.0 : std::exp(lb);
  return pb;
}

// Smallest integer slack u whose evaluated bound is <= eps.
inline PadBound pad_radius(double t, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("pad_radius: eps must be positive");
  if (eps >= 1.0) return evaluate_pad_bound(t, 0.0);
  for (int u = 0; u <= 4000; ++u) {
    PadBound pb = evaluate_pad_bound(t, u);
    if (pb.bound <= eps) return pb;
  }
  throw std::runtime_error("pad_radius: slack search exhausted");
}

// ---------------------------------------------------------------------
// Lazy backward evaluation
// ---------------------------------------------------------------------

// Computes eta_t(s) by backward recursion over ring times, memoizing
// (site, ring-count) values so shared ancestors are evaluated once.
// The memo persists across queries on one instance.
template <class Clock = ClockStream>
class LazyEvaluator {
 public:
  LazyEvaluator(const Clock& clocks, const UniformField& init_field, double p,
                BoundaryPolicy policy, std::uint64_t budget = 50'000'000)
      : clocks_(clocks), field_(init_field), p_(p), policy_(policy), budget_(budget) {
    if (policy != BoundaryPolicy::FrozenZero && policy != BoundaryPolicy::FrozenOne)
      throw std::invalid_argument("evaluate_lazy: policy must be FrozenZero or FrozenOne");
  }

  bool value_at(Site s, double t) {
    if (t < 0) throw std::invalid_argument("evaluate_lazy: negative time");
    // value just after all rings in [0,t]; with rings a.s. distinct this is
    // eta_t(s), matching the forward engine which applies rings at time <= t
    return value_before(s, std::nextafter(t, std::numeric_limits<double>::infinity()));
  }

 private:
  bool initial(Site s) const { return field_.at(s) <= p_; }

  // Opinion of s strictly before time t (rings at exactly t not applied).
  bool value_before(Site s, double t) {
    const Rect& region = field_.region();
    if (!region.contains(s))
      return policy_ == BoundaryPolicy::FrozenOne;
    auto [n, last] = clocks_.rings_before(s, t);
    if (n == 0) return initial(s);
    std::uint64_t key = (static_cast<std::uint64_t>(region.index_of(s)) << 24) | n;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (++steps_ > budget_)
      throw std::runtime_error("evaluate_lazy: recursion budget exceeded (clock-stream defect?)");
    int sum = 0;
    for (Site nb : orthogonal_neighbors(s)) {
      bool v;
      if (region.contains(nb))
        v = value_before(nb, last);
      else
        v = policy_ == BoundaryPolicy::FrozenOne;
      sum += v;
    }
    bool result;
    if (2 * sum > 4)
      result = true;
    else if (2 * sum < 4)
      result = false;
    else
      result = value_before(s, last);
    memo_.emplace(key, result);
    return result;
  }

  const Clock& clocks_;
  const UniformField& field_;
  double p_;
  BoundaryPolicy policy_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  std::unordered_map<std::uint64_t, bool> memo_;
};

template <class Clock>
bool evaluate_lazy(Site s, double t, const Clock& clocks, const UniformField& init_field,
                   double p, BoundaryPolicy policy) {
  LazyEvaluator<Clock> ev(clocks, init_field, p, policy);
  return ev.value_at(s, t);
}

// ---------------------------------------------------------------------
// Influence sets (cones of light)
// ---------------------------------------------------------------------

struct InfluenceSet {
  Site root;
  double t = 0;
  std::set<Site> members;

  // Chebyshev reach from the root; the cone hits x + boundary(B_m) iff
  // this is >= m.
  int chebyshev_radius() const {
    int r = 0;
    for (Site s : members) {
      r = std::max(r, std::abs(s.x - root.x));
      r = std::max(r, std::abs(s.y - root.y));
    }
    return r;
  }
};

// The exact set of sites whose initial opinion is read by the backward
// evaluation of eta_t(s) on the infinite lattice. Independent of the
// initial field.
inline InfluenceSet influence_set(Site s, double t, const ClockStream& clocks) {
  if (t < 0) throw std::invalid_argument("influence_set: negative time");
  InfluenceSet out;
  out.root = s;
  out.t = t;
  struct KeyHash {
    std::size_t operator()(const std::tuple<int, int, std::uint64_t>& k) const {
      auto [x, y, n] = k;
      std::uint64_t h = majperc::detail::mix64(
          (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) ^
          static_cast<std::uint32_t>(y));
      return majperc::detail::mix64(h ^ n);
    }
  };
  std::unordered_set<std::tuple<int, int, std::uint64_t>, KeyHash> seen;

  // explicit stack; cones can be deep at large t
  struct Frame {
    Site v;
    double t;
  };
  std::vector<Frame> stack{{s, std::nextafter(t, std::numeric_limits<double>::infinity())}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    auto [n, last] = clocks.rings_before(f.v, f.t);
    if (n == 0) {
      out.members.insert(f.v);
      continue;
    }
    if (!seen.insert({f.v.x, f.v.y, n}).second) continue;
    stack.push_back({f.v, last});  // own opinion is queried at the ring
    for (Site nb : orthogonal_neighbors(f.v)) stack.push_back({nb, last});
  }
  return out;
}

}  // namespace majperc
