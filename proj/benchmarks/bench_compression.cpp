#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cslearn/compression.hpp"

namespace {

using cslearn::CompressionSpec;

std::vector<double> gaussian(std::size_t m) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  std::vector<double> x(m);
  for (auto& v : x) v = normal(gen);
  return x;
}

void run(benchmark::State& state, const CompressionSpec& spec) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto x = gaussian(m);
  cslearn::Rng rng(2);
  for (auto _ : state) {
    auto cv = cslearn::compress(spec, x, rng);
    benchmark::DoNotOptimize(cv);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Full(benchmark::State& state) { run(state, CompressionSpec::full()); }
void BM_TopK(benchmark::State& state) {
  run(state, CompressionSpec::top_k(static_cast<std::size_t>(state.range(0)) / 20));
}
void BM_RandK(benchmark::State& state) {
  run(state, CompressionSpec::rand_k(static_cast<std::size_t>(state.range(0)) / 20));
}
void BM_Qsgd(benchmark::State& state) { run(state, CompressionSpec::qsgd(2)); }
void BM_QsgdDet(benchmark::State& state) { run(state, CompressionSpec::qsgd(2, true)); }

}  // namespace

BENCHMARK(BM_Full)->Arg(400)->Arg(4000);
BENCHMARK(BM_TopK)->Arg(400)->Arg(4000);
BENCHMARK(BM_RandK)->Arg(400)->Arg(4000);
BENCHMARK(BM_Qsgd)->Arg(400)->Arg(4000);
BENCHMARK(BM_QsgdDet)->Arg(400)->Arg(4000);
