#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <utility>

namespace lgcn {

// splitmix64 finalizer; used to derive independent seed streams from one
// base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// Named sub-stream of a base seed. Streams with different tags or indices
// are independent for all practical purposes.
inline std::uint64_t seed_stream(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index = 0) {
  return splitmix64(base ^ splitmix64(fnv1a(tag) + 0x632be59bd9b4e019ull * (index + 1)));
}

// mt19937_64 output is pinned by the standard. The mappings below avoid
// std::*_distribution so generated sequences do not depend on which standard
// library the artifact is built against.

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
  return std::ldexp(static_cast<double>(g() >> 11), -53);
}

inline double uniform_range(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Box-Muller, cosine branch only.
inline double normal01(std::mt19937_64& g) {
  double u1 = uniform01(g);
  while (u1 <= 0.0) u1 = uniform01(g);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925287 * u2);
}

// Unbiased integer in [0, n), n >= 1, by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t v = g();
  while (v >= limit) v = g();
  return v % n;
}

// Fisher-Yates with the library's own index mapping, same rationale as above.
template <typename Vec>
void shuffle_inplace(std::mt19937_64& g, Vec& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace lgcn
