#include "cslearn/rng.hpp"

namespace cslearn {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t run,
                          std::uint64_t round, std::uint64_t agent,
                          StreamPurpose purpose) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ run);
  h = splitmix64(h ^ round);
  h = splitmix64(h ^ agent);
  return splitmix64(h ^ static_cast<std::uint64_t>(purpose));
}

Rng StreamKey::stream(std::uint64_t round, std::uint64_t agent,
                      StreamPurpose purpose) const {
  return Rng{derive_seed(seed, run, round, agent, purpose)};
}

}  // namespace cslearn
