#pragma once

// Shared helpers for the test suites: tiny independent oracles and
// statistics utilities. Nothing here may call the implementation path it
// is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "majperc/grid.hpp"

namespace majperc_test {

using majperc::Rect;
using majperc::Site;
using majperc::SpinConfig;

// Rows are listed top-to-bottom with increasing y, '1' = open.
inline SpinConfig config_from_rows(const std::vector<std::string>& rows, int x0 = 0, int y0 = 0) {
  int h = static_cast<int>(rows.size());
  int w = static_cast<int>(rows[0].size());
  SpinConfig cfg(Rect{x0, x0 + w - 1, y0, y0 + h - 1});
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      cfg.set({x0 + i, y0 + j}, rows[j][i] == '1');
  return cfg;
}

// One-sample Kolmogorov-Smirnov statistic against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Asymptotic KS critical value at level alpha (1.628 at 1%).
inline double ks_critical(std::size_t n, double c_alpha = 1.628) {
  return c_alpha / std::sqrt(static_cast<double>(n));
}

inline double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double num = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(va * vb);
}

// Independent connectivity oracle: exhaustive simple-path enumeration by
// recursive backtracking (not the library's BFS).
inline bool brute_force_connects(const SpinConfig& cfg, const Rect& region,
                                 const std::vector<Site>& A, const std::vector<Site>& B) {
  std::vector<char> in_b(region.area(), 0);
  for (Site s : B) in_b[region.index_of(s)] = 1;
  std::vector<char> on_path(region.area(), 0);

  std::function<bool(Site)> extend = [&](Site s) -> bool {
    if (in_b[region.index_of(s)]) return true;
    for (Site n : majperc::orthogonal_neighbors(s)) {
      if (!region.contains(n) || !cfg.get(n)) continue;
      std::int64_t i = region.index_of(n);
      if (on_path[i]) continue;
      on_path[i] = 1;
      if (extend(n)) return true;
      on_path[i] = 0;
    }
    return false;
  };
  for (Site s : A) {
    if (!cfg.get(s)) continue;
    std::fill(on_path.begin(), on_path.end(), 0);
    on_path[region.index_of(s)] = 1;
    if (extend(s)) return true;
  }
  return false;
}

// Independent surrounding-circuit oracle via winding numbers: the open
// subgraph of the annulus contains a cycle of nonzero winding around the
// hole iff some non-tree edge closes a loop whose accumulated angle is a
// nonzero multiple of 2*pi.
inline bool brute_force_circuit(const SpinConfig& cfg, int m, int n) {
  const double cx = 0.013, cy = 0.021;  // inside the hole, off-lattice
  Rect outer{-n, n, -n, n};
  Rect hole{-m, m, -m, m};
  auto in_annulus = [&](Site s) { return outer.contains(s) && !hole.contains(s); };
  auto angle = [&](Site s) { return std::atan2(s.y - cy, s.x - cx); };
  auto step = [&](Site u, Site v) {
    double d = angle(v) - angle(u);
    while (d > M_PI) d -= 2 * M_PI;
    while (d <= -M_PI) d += 2 * M_PI;
    return d;
  };
  std::vector<double> pot(outer.area(), 0.0);
  std::vector<char> visited(outer.area(), 0);
  for (std::int64_t start = 0; start < outer.area(); ++start) {
    Site s0 = outer.site_at(start);
    if (!in_annulus(s0) || !cfg.get(s0) || visited[start]) continue;
    visited[start] = 1;
    pot[start] = 0.0;
    std::vector<Site> stack{s0};
    while (!stack.empty()) {
      Site u = stack.back();
      stack.pop_back();
      for (Site v : majperc::orthogonal_neighbors(u)) {
        if (!in_annulus(v) || !cfg.get(v)) continue;
        std::int64_t vi = outer.index_of(v);
        double through = pot[outer.index_of(u)] + step(u, v);
        if (!visited[vi]) {
          visited[vi] = 1;
          pot[vi] = through;
          stack.push_back(v);
        } else if (std::abs(through - pot[vi]) > M_PI) {
          return true;  // fundamental cycle winds around the hole
        }
      }
    }
  }
  return false;
}

}  // namespace majperc_test
