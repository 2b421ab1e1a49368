#pragma once

// Lattice geometry, opinion configurations and boundary policies.

#include <array>
#include <cassert>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "majperc/rng.hpp"

namespace majperc {

struct Site {
  int x = 0;
  int y = 0;

  friend Site operator+(Site a, Site b) { return {a.x + b.x, a.y + b.y}; }
  bool operator==(const Site&) const = default;
  // Row-major order; also the deterministic tie-break for simultaneous rings.
  friend bool operator<(Site a, Site b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }
};

enum class Parity { A, B };  // A iff x+y even

inline Parity parity_class(Site s) {
  return ((s.x + s.y) & 1) == 0 ? Parity::A : Parity::B;
}

inline std::array<Site, 4> orthogonal_neighbors(Site s) {
  return {Site{s.x + 1, s.y}, Site{s.x - 1, s.y}, Site{s.x, s.y + 1},
          Site{s.x, s.y - 1}};
}

// Inclusive integer rectangle [x0,x1] x [y0,y1].
struct Rect {
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;

  Rect() = default;
  Rect(int x0_, int x1_, int y0_, int y1_) : x0(x0_), x1(x1_), y0(y0_), y1(y1_) {
    assert(x0 <= x1 && y0 <= y1);
  }

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  std::int64_t area() const {
    return static_cast<std::int64_t>(width()) * height();
  }
  bool contains(Site s) const {
    return s.x >= x0 && s.x <= x1 && s.y >= y0 && s.y <= y1;
  }
  bool contains(const Rect& r) const {
    return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
  }
  Rect translated(Site v) const { return {x0 + v.x, x1 + v.x, y0 + v.y, y1 + v.y}; }
  Rect padded(int m) const { return {x0 - m, x1 + m, y0 - m, y1 + m}; }
  std::int64_t index_of(Site s) const {
    return static_cast<std::int64_t>(s.y - y0) * width() + (s.x - x0);
  }
  Site site_at(std::int64_t idx) const {
    return {x0 + static_cast<int>(idx % width()), y0 + static_cast<int>(idx / width())};
  }
  bool operator==(const Rect&) const = default;
};

enum class BoundaryPolicy {
  FreeFinite,  // boundary sites simply have fewer neighbors
  FrozenZero,  // out-of-region reads return 0
  FrozenOne,   // out-of-region reads return 1
  Periodic,    // coordinates wrap modulo region dimensions
};

inline const char* to_string(BoundaryPolicy p) {
  switch (p) {
    case BoundaryPolicy::FreeFinite: return "free";
    case BoundaryPolicy::FrozenZero: return "frozen0";
    case BoundaryPolicy::FrozenOne: return "frozen1";
    case BoundaryPolicy::Periodic: return "periodic";
  }
  return "?";
}

inline BoundaryPolicy boundary_policy_from_string(const std::string& s) {
  if (s == "free") return BoundaryPolicy::FreeFinite;
  if (s == "frozen0") return BoundaryPolicy::FrozenZero;
  if (s == "frozen1") return BoundaryPolicy::FrozenOne;
  if (s == "periodic") return BoundaryPolicy::Periodic;
  throw std::invalid_argument("unknown boundary policy: " + s);
}

// A rectangular window of 0/1 opinions, bit-packed row-major.
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(Rect region)
      : region_(region), bits_((region.area() + 63) / 64, 0) {}

  const Rect& region() const { return region_; }

  bool get(Site s) const {
    assert(region_.contains(s));
    std::int64_t i = region_.index_of(s);
    return (bits_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(Site s, bool v) {
    assert(region_.contains(s));
    std::int64_t i = region_.index_of(s);
    std::uint64_t mask = 1ULL << (i & 63);
    if (v)
      bits_[i >> 6] |= mask;
    else
      bits_[i >> 6] &= ~mask;
  }

  // Read through the boundary policy; never silently defaults.
  bool read(Site s, BoundaryPolicy policy) const {
    if (region_.contains(s)) return get(s);
    switch (policy) {
      case BoundaryPolicy::FrozenZero: return false;
      case BoundaryPolicy::FrozenOne: return true;
      case BoundaryPolicy::Periodic: return get(wrap(s));
      case BoundaryPolicy::FreeFinite:
        throw std::logic_error("FreeFinite read outside region");
    }
    throw std::logic_error("bad policy");
  }

  Site wrap(Site s) const {
    int w = region_.width(), h = region_.height();
    int dx = ((s.x - region_.x0) % w + w) % w;
    int dy = ((s.y - region_.y0) % h + h) % h;
    return {region_.x0 + dx, region_.y0 + dy};
  }

  std::int64_t count_ones() const {
    std::int64_t n = 0;
    std::int64_t total = region_.area();
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      std::uint64_t word = bits_[w];
      std::int64_t base = static_cast<std::int64_t>(w) * 64;
      if (base + 64 > total && total > base)
        word &= (total - base == 64) ? ~0ULL : ((1ULL << (total - base)) - 1);
      n += __builtin_popcountll(word);
    }
    return n;
  }
  std::int64_t count_zeros() const { return region_.area() - count_ones(); }

  bool operator==(const SpinConfig& o) const {
    if (region_ != o.region_) return false;
    std::int64_t total = region_.area();
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      std::uint64_t a = bits_[w], b = o.bits_[w];
      std::int64_t base = static_cast<std::int64_t>(w) * 64;
      std::uint64_t mask = ~0ULL;
      if (base + 64 > total) mask = (1ULL << (total - base)) - 1;
      if ((a & mask) != (b & mask)) return false;
    }
    return true;
  }

  // Sitewise a <= b over a shared region.
  friend bool leq(const SpinConfig& a, const SpinConfig& b) {
    assert(a.region_ == b.region_);
    std::int64_t total = a.region_.area();
    for (std::size_t w = 0; w < a.bits_.size(); ++w) {
      std::uint64_t x = a.bits_[w] & ~b.bits_[w];
      std::int64_t base = static_cast<std::int64_t>(w) * 64;
      if (base + 64 > total) x &= (1ULL << (total - base)) - 1;
      if (x) return false;
    }
    return true;
  }

  void fill(bool v) {
    std::uint64_t word = v ? ~0ULL : 0ULL;
    for (auto& w : bits_) w = word;
  }

  // Header line `rect x0 x1 y0 y1`, then one row of 0/1 chars per line.
  void serialize(std::ostream& os) const {
    os << "rect " << region_.x0 << ' ' << region_.x1 << ' ' << region_.y0
       << ' ' << region_.y1 << '\n';
    for (int y = region_.y0; y <= region_.y1; ++y) {
      for (int x = region_.x0; x <= region_.x1; ++x)
        os << (get({x, y}) ? '1' : '0');
      os << '\n';
    }
  }

  static SpinConfig deserialize(std::istream& is) {
    std::string tag;
    int x0, x1, y0, y1;
    if (!(is >> tag >> x0 >> x1 >> y0 >> y1) || tag != "rect")
      throw std::runtime_error("SpinConfig: bad header");
    SpinConfig cfg(Rect{x0, x1, y0, y1});
    std::string line;
    std::getline(is, line);  // rest of header line
    for (int y = y0; y <= y1; ++y) {
      if (!std::getline(is, line) || static_cast<int>(line.size()) < cfg.region_.width())
        throw std::runtime_error("SpinConfig: truncated row");
      for (int x = x0; x <= x1; ++x) {
        char c = line[x - x0];
        if (c != '0' && c != '1') throw std::runtime_error("SpinConfig: bad cell");
        cfg.set({x, y}, c == '1');
      }
    }
    return cfg;
  }

  std::string to_string() const {
    std::ostringstream oss;
    serialize(oss);
    return oss.str();
  }

 private:
  Rect region_;
  std::vector<std::uint64_t> bits_;
};

// Per-site uniform values on a region, generated from a SeedSpec.
class UniformField {
 public:
  UniformField(SeedSpec seed, Rect region) : seed_(std::move(seed)), region_(region) {}

  double at(Site s) const { return to_uniform(counter_u64(site_key(seed_, s.x, s.y), 0)); }
  const Rect& region() const { return region_; }
  const SeedSpec& seed() const { return seed_; }

 private:
  SeedSpec seed_;
  Rect region_;
};

inline UniformField uniform_field(const SeedSpec& seed, Rect region) {
  return UniformField(seed, region);
}

// Open-at-equality convention: site open iff U_x <= p, so a fixed field
// couples all densities monotonically.
inline SpinConfig random_init(Rect region, double p, const UniformField& uniforms) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("random_init: p outside [0,1]");
  SpinConfig cfg(region);
  for (int y = region.y0; y <= region.y1; ++y)
    for (int x = region.x0; x <= region.x1; ++x)
      if (uniforms.at({x, y}) <= p) cfg.set({x, y}, true);
  return cfg;
}

struct ResolvedNeighbor {
  Site site;       // resolved in-region site for Periodic, raw site otherwise
  bool in_region;  // false only under Frozen* policies
  bool frozen_value = false;
};

inline std::vector<ResolvedNeighbor> neighbors(Site s, Rect region, BoundaryPolicy policy) {
  if (!region.contains(s)) throw std::invalid_argument("neighbors: site outside region");
  std::vector<ResolvedNeighbor> out;
  out.reserve(4);
  for (Site n : orthogonal_neighbors(s)) {
    if (region.contains(n)) {
      out.push_back({n, true, false});
      continue;
    }
    switch (policy) {
      case BoundaryPolicy::FreeFinite:
        break;  // dropped: boundary sites have fewer neighbors
      case BoundaryPolicy::FrozenZero:
        out.push_back({n, false, false});
        break;
      case BoundaryPolicy::FrozenOne:
        out.push_back({n, false, true});
        break;
      case BoundaryPolicy::Periodic: {
        int w = region.width(), h = region.height();
        int dx = ((n.x - region.x0) % w + w) % w;
        int dy = ((n.y - region.y0) % h + h) % h;
        out.push_back({Site{region.x0 + dx, region.y0 + dy}, true, false});
        break;
      }
    }
  }
  return out;
}

}  // namespace majperc
