#ifndef PAVOID_RNG_HPP
#define PAVOID_RNG_HPP

// Platform-stable hashing and random streams. Every random choice in the
// pipeline is a pure function of (seed, key), so results do not depend on
// iteration order or on the standard library's distribution implementations.

#include <cstdint>
#include <span>

namespace pavoid {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v)); }

inline std::uint64_t hash_key(std::uint64_t seed, std::span<const std::int64_t> key, std::uint64_t salt = 0) {
  std::uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dULL);
  for (auto k : key) h = hash_combine(h, static_cast<std::uint64_t>(k));
  return hash_combine(h, salt);
}

/// Sequential SplitMix64 stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do v = next();
    while (v >= limit);
    return v % bound;
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace pavoid

#endif
