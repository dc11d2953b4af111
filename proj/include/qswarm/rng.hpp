#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace qswarm {

// SplitMix64 mixing step, used to turn a master seed into well-separated
// per-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform double in [0, 1) built from the top 53 bits of the engine output.
// Avoids std::uniform_real_distribution, whose output is not pinned by the
// standard; this keeps traces byte-identical for a given seed.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection sampling.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) {
      return r % n;
    }
  }
}

inline bool coin_flip(std::mt19937_64& rng) { return uniform_below(rng, 2) == 1; }

// Expands one master seed into independent named generators, one per
// subsystem (source emission, each party's bases and measurements, the
// adversary). Toggling an adversary on or off therefore never shifts the
// randomness consumed by honest parties.
class RngPool {
 public:
  explicit RngPool(std::uint64_t master_seed) : master_seed_(master_seed) {}

  std::mt19937_64 stream(std::string_view name) const {
    return std::mt19937_64(splitmix64(master_seed_ ^ fnv1a64(name)));
  }

  std::uint64_t master_seed() const { return master_seed_; }

 private:
  std::uint64_t master_seed_;
};

}  // namespace qswarm
