#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sacl {

// FNV-1a 64-bit. Used for stream tags and config hashes.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// splitmix64 output function (Steele, Lea, Flood).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic 64-bit generator. The algorithm is part of the artifact
// contract: every emitted document names it, and shuffles must replay
// byte-identically for a fixed seed, so nothing here may be swapped for
// std::mt19937/std::shuffle (unspecified across standard libraries).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Unbiased draw from [0, n) by rejection (arc4random_uniform scheme).
  std::uint64_t bounded(std::uint64_t n) {
    if (n < 2) return 0;
    const std::uint64_t min = (-n) % n;  // 2^64 mod n
    std::uint64_t x = next();
    while (x < min) x = next();
    return x % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Box-Muller, cosine branch only.
  double gaussian() {
    const double u1 = 1.0 - unit();  // (0, 1]
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Fisher-Yates, high index down.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(bounded(i + 1));
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Stream derivation: all randomness in a run flows from one seed, with
// independent streams keyed by a purpose tag and up to two indices
// (e.g. stage, epoch). state = mix(mix(mix(seed ^ fnv1a(tag)) ^ a) ^ b).
inline SplitMix64 derive_rng(std::uint64_t seed, std::string_view tag,
                             std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = mix64(seed ^ fnv1a64(tag));
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  return SplitMix64(s);
}

// Largest-remainder (Hamilton) apportionment of `total` items over
// `weights`. Counts are floor(w_i * total) plus one for the largest
// fractional remainders; ties resolve to the lower index. Every count is
// within 1 of its real-valued target.
inline std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  const std::size_t k = weights.size();
  std::vector<std::size_t> counts(k, 0);
  std::vector<double> remainders(k, 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double q = weights[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(q);
    remainders[i] = q - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < total) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < k; ++i) {
      if (remainders[i] > remainders[best]) best = i;
    }
    counts[best] += 1;
    remainders[best] = -1.0;
    assigned += 1;
  }
  return counts;
}

}  // namespace sacl
