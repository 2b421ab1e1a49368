#pragma once

// Counter-based splittable randomness. Every draw is a pure function of
// (master_seed, replica_id, purpose, site, index), so any site's k-th
// variate can be generated without materializing whole fields.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace majperc {

namespace detail {

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's public-domain variant).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Identifies one independent stream of randomness. Distinct
// (master_seed, replica_id, purpose) tuples give statistically
// independent streams; identical tuples give bit-identical streams on
// every platform.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint32_t replica_id = 0;
  std::string purpose;  // e.g. "clock", "init", "enh"

  std::uint64_t base_key() const {
    std::uint64_t h = detail::mix64(master_seed + detail::kGamma);
    h = detail::mix64(h ^ (static_cast<std::uint64_t>(replica_id) + detail::kGamma));
    h = detail::mix64(h ^ detail::fnv1a(purpose));
    return h;
  }

  bool operator==(const SeedSpec&) const = default;
};

// Per-(key, index) raw 64-bit output: a splitmix64 stream keyed by the
// derived site key, addressed at random by the counter.
inline std::uint64_t counter_u64(std::uint64_t key, std::uint64_t index) {
  return detail::mix64(key + (index + 1) * detail::kGamma);
}

inline std::uint64_t site_key(const SeedSpec& seed, int x, int y) {
  std::uint64_t xy = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
                     static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
  return detail::mix64(seed.base_key() ^ detail::mix64(xy + detail::kGamma));
}

// Uniform in [0,1) with 53 random bits.
inline double to_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in (0,1); used where an exact 0 would break strict positivity.
inline double to_uniform_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Exp(1) by inverse CDF; strictly positive.
inline double to_exponential(std::uint64_t bits) {
  return -std::log1p(-to_uniform_open(bits));
}

}  // namespace majperc
