#pragma once

#include <cstdint>
#include <random>

namespace cslearn {

using Rng = std::mt19937_64;

// Distinct purposes never share a stream even when every other coordinate
// of the key coincides.
enum class StreamPurpose : std::uint64_t {
  World = 1,
  Topology = 2,
  Signals = 3,
  Compression = 4,
};

/// Identifies one family of random streams: a master seed and a run index.
/// Individual streams are then addressed by (round, agent, purpose).
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t run = 0;

  [[nodiscard]] Rng stream(std::uint64_t round, std::uint64_t agent,
                           StreamPurpose purpose) const;
};

/// Mixes the key coordinates into a single 64-bit seed (splitmix64 chain).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t run,
                                        std::uint64_t round,
                                        std::uint64_t agent,
                                        StreamPurpose purpose);

}  // namespace cslearn
