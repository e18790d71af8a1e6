#pragma once

#include <cstdint>

namespace relaysim {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for trial `index` of sub-stream `stream` under `master`.
///
/// Depends only on its arguments, so trial outcomes do not depend on which
/// worker ran them or in what order. Experiments use the relay count as the
/// stream so every scheme and every SNR point sees the same channel draws.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ splitmix64(stream + 0x5851f42d4c957f2dULL)) + index);
}

}  // namespace relaysim
