#pragma once

#include <cstdint>

namespace loctime {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-path seed: hash(base_seed, path_index). Frozen; changing it
/// invalidates every golden aggregate.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(base_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Independent sub-stream of a base seed (used to give the two sides of a
/// paired experiment unrelated seeds).
constexpr std::uint64_t substream(std::uint64_t base_seed,
                                  std::uint64_t stream) noexcept {
  return mix64(base_seed + 0xd1b54a32d192ed03ULL * (stream + 1));
}

}  // namespace loctime
