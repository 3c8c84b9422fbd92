#include <benchmark/benchmark.h>

#include "cslearn/learner.hpp"

namespace {

using namespace cslearn;

// One synchronous round on a torus with 400 hypotheses.
void round_benchmark(benchmark::State& state, LearnerMode mode) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t m = 400;
  RandomWorldParams params;
  params.agents = n;
  params.hypotheses = m;
  params.alphabet_size = 20;
  Rng rng(3);
  const auto world = random_world(params, rng);
  const auto mixing = mixing_matrix(build_graph(TopologyKind::Torus, n, {}, rng));
  const auto spec = CompressionSpec::top_k(20);
  auto net = init_state(world, mixing, 0.1, uniform_priors(n, m), mode);
  const SignalTable signals(world, 64, StreamKey{4, 0});
  std::size_t t = 0;
  for (auto _ : state) {
    auto sent = advance(net, world, mixing, signals.at(t++ % 64), spec, StreamKey{5, 0});
    benchmark::DoNotOptimize(sent);
  }
}

void BM_RoundStandard(benchmark::State& state) {
  round_benchmark(state, LearnerMode::Standard);
}
void BM_RoundMemoryEfficient(benchmark::State& state) {
  round_benchmark(state, LearnerMode::MemoryEfficient);
}

}  // namespace

BENCHMARK(BM_RoundStandard)->Arg(16)->Arg(100);
BENCHMARK(BM_RoundMemoryEfficient)->Arg(16)->Arg(100);
