#pragma once

#include <cstdint>
#include <random>

namespace rci {

/// Purposes that get their own random stream inside a replication.
enum class StreamPurpose : std::uint64_t {
  Structure = 1,  // edges, coefficients, error tags
  Sample = 2,     // error draws and labels
  Split = 3,      // train/test partition
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives the seed of an independent stream from (master seed, replication,
/// purpose). Distinct triples map to unrelated 64-bit seeds.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication,
                                           StreamPurpose purpose) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ (replication + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Engine(seq);
}

}  // namespace rci
