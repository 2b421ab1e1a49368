#pragma once

// Static configuration analysis: cluster labeling, crossing events,
// circuits via planar duality, and boundary-to-boundary connectivity.

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "majperc/grid.hpp"

namespace majperc {

enum class Connectivity {
  NearestNeighbor,  // 4 orthogonal neighbors
  Star,             // 8 neighbors; used for the closed/dual side only
};

inline int neighbor_offsets(Connectivity conn, std::array<Site, 8>& out) {
  out = {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1},
         Site{1, 1}, Site{1, -1}, Site{-1, 1}, Site{-1, -1}};
  return conn == Connectivity::Star ? 8 : 4;
}

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::int64_t n) : parent_(n) {
    for (std::int64_t i = 0; i < n; ++i) parent_[i] = i;
  }
  std::int64_t find(std::int64_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void unite(std::int64_t a, std::int64_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // smaller index wins, keeping labels canonical
    if (a < b)
      parent_[b] = a;
    else
      parent_[a] = b;
  }

 private:
  std::vector<std::int64_t> parent_;
};

}  // namespace detail

struct ClusterLabeling {
  Rect region;
  // per-site canonical label = row-major index of the smallest member;
  // -1 on closed sites
  std::vector<std::int32_t> labels;
  std::int64_t cluster_count = 0;
  // (label, size), sorted by label
  std::vector<std::pair<std::int32_t, std::int64_t>> sizes;

  std::int32_t label_at(Site s) const { return labels[region.index_of(s)]; }
};

inline ClusterLabeling label_clusters(const SpinConfig& config, Connectivity conn) {
  const Rect& r = config.region();
  std::int64_t n = r.area();
  detail::UnionFind uf(n);
  std::array<Site, 8> offs;
  int k = neighbor_offsets(conn, offs);
  for (std::int64_t i = 0; i < n; ++i) {
    Site s = r.site_at(i);
    if (!config.get(s)) continue;
    for (int j = 0; j < k; ++j) {
      Site t = s + offs[j];
      if (!r.contains(t) || !config.get(t)) continue;
      uf.unite(i, r.index_of(t));
    }
  }
  ClusterLabeling out;
  out.region = r;
  out.labels.assign(n, -1);
  std::vector<std::int64_t> size_by_root(n, 0);
  for (std::int64_t i = 0; i < n; ++i) {
    if (!config.get(r.site_at(i))) continue;
    std::int64_t root = uf.find(i);
    out.labels[i] = static_cast<std::int32_t>(root);
    ++size_by_root[root];
  }
  for (std::int64_t i = 0; i < n; ++i)
    if (size_by_root[i] > 0) out.sizes.emplace_back(static_cast<std::int32_t>(i), size_by_root[i]);
  out.cluster_count = static_cast<std::int64_t>(out.sizes.size());
  return out;
}

inline std::int64_t largest_cluster_size(const SpinConfig& config) {
  ClusterLabeling lab = label_clusters(config, Connectivity::NearestNeighbor);
  std::int64_t best = 0;
  for (auto& [label, size] : lab.sizes) best = std::max(best, size);
  return best;
}

// True iff an open path inside `region` joins A to B. Sets *warning when
// A or B is empty (result is then vacuously false).
inline bool connects(const SpinConfig& config, const Rect& region,
                     const std::vector<Site>& A, const std::vector<Site>& B,
                     Connectivity conn, bool* warning = nullptr) {
  if (warning) *warning = false;
  if (A.empty() || B.empty()) {
    if (warning) *warning = true;
    return false;
  }
  if (!config.region().contains(region))
    throw std::invalid_argument("connects: region outside config");
  std::int64_t n = region.area();
  std::vector<char> target(n, 0), visited(n, 0);
  for (Site s : B) {
    if (!region.contains(s)) throw std::invalid_argument("connects: B site outside region");
    target[region.index_of(s)] = 1;
  }
  std::array<Site, 8> offs;
  int k = neighbor_offsets(conn, offs);
  std::vector<Site> stack;
  for (Site s : A) {
    if (!region.contains(s)) throw std::invalid_argument("connects: A site outside region");
    if (!config.get(s) || visited[region.index_of(s)]) continue;
    visited[region.index_of(s)] = 1;
    stack.push_back(s);
  }
  while (!stack.empty()) {
    Site s = stack.back();
    stack.pop_back();
    if (target[region.index_of(s)]) return true;
    for (int j = 0; j < k; ++j) {
      Site t = s + offs[j];
      if (!region.contains(t)) continue;
      std::int64_t ti = region.index_of(t);
      if (visited[ti] || !config.get(t)) continue;
      visited[ti] = 1;
      stack.push_back(t);
    }
  }
  return false;
}

// Left-to-right open crossing of rect under nearest-neighbor adjacency.
inline bool has_h_crossing(const SpinConfig& config, const Rect& rect) {
  if (!config.region().contains(rect))
    throw std::invalid_argument("has_h_crossing: rect outside config");
  std::vector<Site> left, right;
  for (int y = rect.y0; y <= rect.y1; ++y) {
    left.push_back({rect.x0, y});
    right.push_back({rect.x1, y});
  }
  return connects(config, rect, left, right, Connectivity::NearestNeighbor);
}

// Open circuit in [-n,n]^2 surrounding [-m,m]^2, detected by planar
// duality: the circuit exists iff the closed sites do not star-connect
// the hole's rim to the outer boundary of the annulus.
inline bool has_circuit(const SpinConfig& config, int m, int n) {
  if (!(0 <= m && m < n)) throw std::invalid_argument("has_circuit: need 0 <= m < n");
  Rect outer{-n, n, -n, n};
  if (!config.region().contains(outer))
    throw std::invalid_argument("has_circuit: annulus outside config");
  Rect hole{-m, m, -m, m};
  auto in_annulus = [&](Site s) { return outer.contains(s) && !hole.contains(s); };
  auto cheb = [](Site s) { return std::max(std::abs(s.x), std::abs(s.y)); };

  std::array<Site, 8> offs;
  int k = neighbor_offsets(Connectivity::Star, offs);
  std::vector<char> visited(outer.area(), 0);
  std::vector<Site> stack;
  // seed: closed sites star-adjacent to the hole
  for (int y = -m - 1; y <= m + 1; ++y)
    for (int x = -m - 1; x <= m + 1; ++x) {
      Site s{x, y};
      if (!in_annulus(s) || config.get(s)) continue;
      visited[outer.index_of(s)] = 1;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    Site s = stack.back();
    stack.pop_back();
    if (cheb(s) == n) return false;  // closed star-path reached the outside
    for (int j = 0; j < k; ++j) {
      Site t = s + offs[j];
      if (!in_annulus(t) || config.get(t)) continue;
      std::int64_t ti = outer.index_of(t);
      if (visited[ti]) continue;
      visited[ti] = 1;
      stack.push_back(t);
    }
  }
  return true;
}

// ---------------------------------------------------------------------
// Renormalization rectangle lists and the concatenation implication
// ---------------------------------------------------------------------

struct RenormRects {
  std::vector<Rect> horizontal;  // crossed left-right
  std::vector<Rect> vertical;    // crossed bottom-top
  Rect big;                      // crossed left-right when all above are
  Rect domain;                   // bounding box of every listed rectangle
};

// The 7-rectangle (factor 3) and 14-rectangle (factor 4) families whose
// joint long-direction crossings concatenate into a left-right crossing of
// the next-scale rectangle `big`. Horizontal strips overlap by factor-2
// widths; each vertical connector sits inside one overlap band, so its
// top-bottom crossing must intersect both adjacent horizontal crossings.
// The factor-4 horizontal chain deliberately overshoots big's right edge;
// any chain passing the edge column still yields the crossing.
inline RenormRects renorm_rectangles(int L, int factor) {
  if (L < 1) throw std::invalid_argument("renorm_rectangles: L must be >= 1");
  RenormRects out;
  if (factor == 3) {
    for (int x = 0; x <= 3; ++x)
      out.horizontal.push_back({2 * x * L + 1, (2 * x + 3) * L, 1, L});
    for (int x = 1; x <= 3; ++x)
      out.vertical.push_back({2 * x * L + 1, (2 * x + 1) * L, -2 * L + 1, L});
    out.big = {1, 9 * L, -2 * L + 1, L};
    out.domain = out.big;
  } else if (factor == 4) {
    for (int x = 0; x <= 7; ++x)
      out.horizontal.push_back({2 * x * L + 1, (2 * x + 4) * L, 1, L});
    for (int x = 1; x <= 6; ++x)
      out.vertical.push_back({2 * x * L + 1, (2 * x + 1) * L, -3 * L + 1, L});
    out.big = {1, 16 * L, -3 * L + 1, L};
    out.domain = {1, 18 * L, -3 * L + 1, L};
  } else {
    throw std::invalid_argument("renorm_rectangles: factor must be 3 or 4");
  }
  return out;
}

inline bool has_v_crossing(const SpinConfig& config, const Rect& rect) {
  if (!config.region().contains(rect))
    throw std::invalid_argument("has_v_crossing: rect outside config");
  std::vector<Site> bottom, top;
  for (int x = rect.x0; x <= rect.x1; ++x) {
    bottom.push_back({x, rect.y0});
    top.push_back({x, rect.y1});
  }
  return connects(config, rect, bottom, top, Connectivity::NearestNeighbor);
}

struct ConcatenationWitness {
  bool all_subrects_crossed = false;
  bool big_crossed = false;
  bool implication_holds() const { return !all_subrects_crossed || big_crossed; }
};

inline ConcatenationWitness concatenation_witness(const SpinConfig& config, int L, int factor) {
  RenormRects rr = renorm_rectangles(L, factor);
  ConcatenationWitness w;
  w.all_subrects_crossed = true;
  for (const Rect& r : rr.horizontal)
    if (!has_h_crossing(config, r)) {
      w.all_subrects_crossed = false;
      break;
    }
  if (w.all_subrects_crossed)
    for (const Rect& r : rr.vertical)
      if (!has_v_crossing(config, r)) {
        w.all_subrects_crossed = false;
        break;
      }
  w.big_crossed = has_h_crossing(config, rr.big);
  return w;
}

}  // namespace majperc
