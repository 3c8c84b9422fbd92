#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "cslearn/world.hpp"
#include "fixtures.hpp"

namespace cslearn {
namespace {

double kl_of(const std::vector<double>& f, const std::vector<double>& l) {
  return kl(f, l);
}

// Two agents, three hypotheses, binary signals.
WorldModel hand_world() {
  WorldModel w;
  w.alpha2 = 0.1;
  Eigen::MatrixXd a(3, 2);
  a << 0.5, 0.5, 0.8, 0.2, 0.2, 0.8;
  Eigen::MatrixXd b(3, 2);
  b << 0.5, 0.5, 0.5, 0.5, 0.9, 0.1;
  w.likelihoods = {a, b};
  w.truths = {Eigen::Vector2d(0.8, 0.2), Eigen::Vector2d(0.5, 0.5)};
  return w;
}

TEST(Kl, HandValues) {
  EXPECT_NEAR(kl_of({0.5, 0.5}, {0.25, 0.75}),
              0.5 * std::log(2.0) + 0.5 * std::log(0.5 / 0.75), 1e-15);
  EXPECT_DOUBLE_EQ(kl_of({0.3, 0.7}, {0.3, 0.7}), 0.0);
  // 0 ln 0 = 0, and l may vanish where f does.
  EXPECT_NEAR(kl_of({1.0, 0.0}, {0.5, 0.0}), std::log(2.0), 1e-15);
  EXPECT_THROW((void)kl_of({0.5, 0.5}, {1.0, 0.0}), std::domain_error);
  EXPECT_THROW((void)kl_of({1.0}, {0.5, 0.5}), std::invalid_argument);
}

TEST(Objective, AveragesAgentDivergences) {
  const auto w = hand_world();
  const auto p = objective(w);
  std::vector<double> expect(3, 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    for (int theta = 0; theta < 3; ++theta) {
      double s = 0.0;
      for (int k = 0; k < 2; ++k) {
        const double f = w.truths[i](k);
        s += f * std::log(f / w.likelihoods[i](theta, k));
      }
      expect[theta] += s / 2.0;
    }
  }
  for (int theta = 0; theta < 3; ++theta) EXPECT_NEAR(p.values[theta], expect[theta], 1e-15);
  // theta = 1 matches agent 0 exactly and agent 1 exactly.
  EXPECT_EQ(p.optimal_set, (std::vector<std::size_t>{1}));
  EXPECT_NEAR(p.optimum, 0.0, 1e-15);
  EXPECT_NEAR(p.gap, std::min(expect[0], expect[2]), 1e-15);
  EXPECT_DOUBLE_EQ(p.excess(1), 0.0);
}

TEST(Objective, TiesFormTheOptimalSet) {
  auto w = hand_world();
  w.likelihoods[0].row(2) = w.likelihoods[0].row(1);
  w.likelihoods[1].row(2) = w.likelihoods[1].row(1);
  const auto p = objective(w);
  EXPECT_EQ(p.optimal_set, (std::vector<std::size_t>{1, 2}));
}

TEST(World, ValidationCatchesBadModels) {
  auto w = hand_world();
  EXPECT_NO_THROW(w.validate());
  w.alpha2 = 0.3;  // 0.2 < 0.3 on the support
  EXPECT_THROW(w.validate(), std::invalid_argument);
  w = hand_world();
  w.truths[0] = Eigen::Vector2d(0.7, 0.2);
  EXPECT_THROW(w.validate(), std::invalid_argument);
  w = hand_world();
  w.likelihoods[1] = Eigen::MatrixXd::Constant(2, 2, 0.5);
  EXPECT_THROW(w.validate(), std::invalid_argument);
}

TEST(RandomWorld, RespectsFloorAndGap) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto w = testing::seeded_world(6, 12, 5, seed, 0.02);
    EXPECT_NO_THROW(w.validate());
    EXPECT_GE(w.min_supported_likelihood(), 0.02);
    const auto p = objective(w);
    EXPECT_EQ(p.optimal_set.size(), 1u);
    EXPECT_GE(p.gap, 1e-3);
  }
  EXPECT_EQ(testing::seeded_world(3, 4, 3, 9), testing::seeded_world(3, 4, 3, 9));
  EXPECT_NE(testing::seeded_world(3, 4, 3, 9), testing::seeded_world(3, 4, 3, 10));
}

TEST(RandomWorld, RejectsImpossibleFloor) {
  RandomWorldParams params;
  params.agents = 2;
  params.hypotheses = 2;
  params.alphabet_size = 10;
  params.alpha2 = 0.1;
  Rng rng(1);
  EXPECT_THROW((void)random_world(params, rng), std::invalid_argument);
}

TEST(Signals, EmpiricalFrequenciesFollowTruth) {
  const auto w = hand_world();
  const SignalTable table(w, 20000, StreamKey{3, 0});
  std::vector<double> ones(2, 0.0);
  for (std::size_t t = 0; t < table.rounds(); ++t) {
    for (std::size_t i = 0; i < 2; ++i) ones[i] += table.at(t)[i] == 1 ? 1.0 : 0.0;
  }
  EXPECT_NEAR(ones[0] / 20000, 0.2, 0.01);
  EXPECT_NEAR(ones[1] / 20000, 0.5, 0.01);
  EXPECT_THROW((void)table.at(20000), std::out_of_range);
}

TEST(Signals, PrefixStableAcrossLengths) {
  const auto w = hand_world();
  const SignalTable short_table(w, 10, StreamKey{5, 2});
  const SignalTable long_table(w, 50, StreamKey{5, 2});
  for (std::size_t t = 0; t < 10; ++t) {
    EXPECT_TRUE(std::equal(short_table.at(t).begin(), short_table.at(t).end(),
                           long_table.at(t).begin()));
  }
}

TEST(Signals, NeverDrawsOutsideSupport) {
  auto w = hand_world();
  w.truths[0] = Eigen::Vector2d(1.0, 0.0);
  Rng rng(11);
  for (int d = 0; d < 1000; ++d) EXPECT_EQ(sample_signal(w, 0, rng), 0u);
}

TEST(WorldFile, RoundTrip) {
  const auto w = testing::seeded_world(4, 6, 3, 21);
  std::stringstream io;
  save_world(io, w);
  EXPECT_EQ(load_world(io), w);
}

TEST(WorldFile, RejectsForeignAndMalformed) {
  std::istringstream not_json("{oops");
  EXPECT_THROW((void)load_world(not_json), std::invalid_argument);
  std::istringstream foreign(R"({"format":"other","version":1})");
  EXPECT_THROW((void)load_world(foreign), std::invalid_argument);
  std::istringstream future(R"({"format":"cslearn-world","version":9})");
  EXPECT_THROW((void)load_world(future), std::invalid_argument);
  std::istringstream ragged(
      R"({"format":"cslearn-world","version":1,"alpha2":0.1,"agent_models":[)"
      R"({"truth":[0.5,0.5],"likelihoods":[[0.5,0.5],[1.0]]}]})");
  EXPECT_THROW((void)load_world(ragged), std::invalid_argument);
}

}  // namespace
}  // namespace cslearn
