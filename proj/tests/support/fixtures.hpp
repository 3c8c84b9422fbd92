#pragma once

#include <cstdint>

#include "cslearn/graph.hpp"
#include "cslearn/rng.hpp"
#include "cslearn/world.hpp"

namespace cslearn::testing {

inline WorldModel seeded_world(std::size_t n, std::size_t m, std::size_t alphabet,
                               std::uint64_t seed, double alpha2 = 1e-3) {
  RandomWorldParams params;
  params.agents = n;
  params.hypotheses = m;
  params.alphabet_size = alphabet;
  params.alpha2 = alpha2;
  Rng rng(seed);
  return random_world(params, rng);
}

inline Topology seeded_graph(TopologyKind kind, std::size_t n, std::uint64_t seed = 1) {
  Rng rng(seed);
  TopologyParams params;
  params.er_probability = er_dense_probability(n);
  return build_graph(kind, n, params, rng);
}

}  // namespace cslearn::testing
