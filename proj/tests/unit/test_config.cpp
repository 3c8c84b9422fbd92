#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "cslearn/config.hpp"

namespace cslearn {
namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_of(const std::string& text) {
  try {
    (void)parse(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsMatchFullScaleSetup) {
  const auto c = parse("");
  EXPECT_EQ(c.agents, 100u);
  EXPECT_EQ(c.hypotheses, 400u);
  EXPECT_EQ(c.alphabet_size, 20u);
  EXPECT_EQ(c.compression.scalar_bits, 64u);
  EXPECT_EQ(c.gamma_policy, GammaPolicy::Theoretical);
  EXPECT_DOUBLE_EQ(c.epsilon, 1e-5);
  EXPECT_DOUBLE_EQ(c.belief_epsilon, 1e-8);
  EXPECT_EQ(c.repeats, 10u);
  EXPECT_EQ(c.runs, 100u);
}

TEST(Config, ParsesEverySection) {
  const auto c = parse(R"(
# desk-scale torus
[network]
topology = torus
agents = 16      # 4 x 4
torus_rows = 4

[world]
hypotheses = 50
alphabet_size = 5
alpha2 = 0.01
min_gap = 0.002

[compression]
kind = "qsgd_det"
bits = 3
scalar_bits = 32

[learning]
gamma = grid
grid = 0.1, 0.2,0.4
mode = memory_efficient

[run]
rounds = 500
seed = 42
repeats = 3
runs = 7
signals = resampled
world = resampled
epsilon = 1e-4
belief_epsilon = 1e-6
stop_at_epsilon = true
rho = 0.1
threads = 2

[sweep]
omegas = 0.05, 0.5, 1
axis = m
values = 20, 40
)");
  EXPECT_EQ(c.topology, TopologyKind::Torus);
  EXPECT_EQ(c.agents, 16u);
  EXPECT_EQ(c.topology_params.torus_rows, 4u);
  EXPECT_EQ(c.hypotheses, 50u);
  EXPECT_EQ(c.alphabet_size, 5u);
  EXPECT_DOUBLE_EQ(c.alpha2, 0.01);
  EXPECT_DOUBLE_EQ(c.min_gap, 0.002);
  EXPECT_EQ(c.compression, CompressionSpec::qsgd(3, true, 32));
  EXPECT_EQ(c.gamma_policy, GammaPolicy::GridSearch);
  EXPECT_EQ(c.gamma_grid, (std::vector<double>{0.1, 0.2, 0.4}));
  EXPECT_EQ(c.mode, LearnerMode::MemoryEfficient);
  EXPECT_EQ(c.rounds, 500u);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.repeats, 3u);
  EXPECT_EQ(c.runs, 7u);
  EXPECT_EQ(c.signals, SignalMode::Resampled);
  EXPECT_EQ(c.world, WorldMode::Resampled);
  EXPECT_DOUBLE_EQ(c.epsilon, 1e-4);
  EXPECT_DOUBLE_EQ(c.belief_epsilon, 1e-6);
  EXPECT_TRUE(c.stop_at_epsilon);
  EXPECT_DOUBLE_EQ(c.rho, 0.1);
  EXPECT_EQ(c.threads, 2u);
  EXPECT_EQ(c.sweep_omegas, (std::vector<double>{0.05, 0.5, 1.0}));
  EXPECT_EQ(c.sweep_axis, SweepAxis::Hypotheses);
  EXPECT_EQ(c.sweep_values, (std::vector<std::size_t>{20, 40}));
}

TEST(Config, FixedGammaAndSparsifier) {
  const auto c = parse("[compression]\nkind = top_k\nk = 3\n[learning]\ngamma = 0.25\n");
  EXPECT_EQ(c.compression, CompressionSpec::top_k(3));
  EXPECT_EQ(c.gamma_policy, GammaPolicy::Fixed);
  EXPECT_DOUBLE_EQ(c.gamma, 0.25);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(error_of("[network]\nagents = many\n").find("network.agents"), std::string::npos);
  EXPECT_NE(error_of("[network]\ncolour = red\n").find("network.colour"), std::string::npos);
  EXPECT_NE(error_of("[extras]\nx = 1\n").find("extras"), std::string::npos);
  EXPECT_NE(error_of("[run]\nepsilon = 2\n").find("run.epsilon"), std::string::npos);
  EXPECT_NE(error_of("[learning]\ngamma = 1.5\n").find("learning.gamma"), std::string::npos);
  EXPECT_NE(error_of("[network]\ntopology = star\n").find("network.topology"),
            std::string::npos);
  EXPECT_NE(error_of("[compression]\nkind = qsgd\nbits = 1\n").find("compression.bits"),
            std::string::npos);
  EXPECT_NE(error_of("[compression]\nkind = top_k\nbits = 3\n").find("compression.bits"),
            std::string::npos);
  EXPECT_NE(error_of("[compression]\nkind = top_k\n").find("compression.k"),
            std::string::npos);
  EXPECT_NE(error_of("[run]\nrounds = 0\n").find("run.rounds"), std::string::npos);
  EXPECT_NE(error_of("[run]\nstop_at_epsilon = maybe\n").find("run.stop_at_epsilon"),
            std::string::npos);
  EXPECT_NE(error_of("[sweep]\nomegas = 0.5, 2\n").find("sweep.omegas"), std::string::npos);
}

TEST(Config, FilesSwitchToCustomTopology) {
  const auto c = parse("[network]\nfile = graph.txt\n[world]\nfile = world.json\n");
  EXPECT_EQ(c.topology, TopologyKind::Custom);
  ASSERT_TRUE(c.topology_file.has_value());
  EXPECT_EQ(c.topology_file->string(), "graph.txt");
  ASSERT_TRUE(c.world_file.has_value());
}

}  // namespace
}  // namespace cslearn
