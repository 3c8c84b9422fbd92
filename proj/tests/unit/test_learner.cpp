#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cslearn/learner.hpp"
#include "fixtures.hpp"

namespace cslearn {
namespace {

using testing::seeded_graph;
using testing::seeded_world;

std::vector<CompressionSpec> all_kinds() {
  return {CompressionSpec::full(), CompressionSpec::top_k(2), CompressionSpec::rand_k(3),
          CompressionSpec::qsgd(3), CompressionSpec::qsgd(4, true)};
}

TEST(Learner, FullCompressionMatchesProbabilitySpaceProduct) {
  // With lossless messages mu_hat_j = mu_j after each exchange, so
  // mu_i' = l_i * mu_i^(1 - gamma (1 - A_ii)) * prod_j mu_j^(gamma A_ij),
  // evaluated here on normalized probabilities.
  const auto world = seeded_world(3, 4, 3, 2);
  const auto a = mixing_matrix(seeded_graph(TopologyKind::Path, 3));
  const double gamma = 0.4;
  auto state = init_state(world, a, gamma, uniform_priors(3, 4), LearnerMode::Standard);
  const SignalTable signals(world, 40, StreamKey{1, 0});
  Eigen::MatrixXd mu = uniform_priors(3, 4);
  for (std::size_t t = 0; t < 40; ++t) {
    (void)advance(state, world, a, signals.at(t), CompressionSpec::full(), StreamKey{1, 0});
    Eigen::MatrixXd next(3, 4);
    for (int i = 0; i < 3; ++i) {
      for (int th = 0; th < 4; ++th) {
        double v = world.likelihoods[i](th, static_cast<Eigen::Index>(signals.at(t)[i]));
        for (int j = 0; j < 3; ++j) {
          const double w = i == j ? 1.0 - gamma * (1.0 - a(i, i)) : gamma * a(i, j);
          v *= std::pow(mu(j, th), w);
        }
        next(i, th) = v;
      }
      next.row(i) /= next.row(i).sum();
    }
    mu = next;
    EXPECT_LT((state.beliefs() - mu).cwiseAbs().maxCoeff(), 1e-12) << "round " << t;
  }
}

TEST(Learner, StandardRoundMatchesDirectTranscription) {
  // Independent bookkeeping: one dense matrix per quantity, each agent's
  // message compressed from the same streams the library uses.
  const auto world = seeded_world(5, 6, 4, 3);
  const auto a = mixing_matrix(seeded_graph(TopologyKind::Ring, 5));
  const double gamma = 0.3;
  for (const auto& spec : all_kinds()) {
    const StreamKey key{17, 2};
    auto state = init_state(world, a, gamma, uniform_priors(5, 6), LearnerMode::Standard);
    const SignalTable signals(world, 60, StreamKey{4, 0});
    Eigen::MatrixXd log_mu = uniform_priors(5, 6).array().log();
    Eigen::MatrixXd hat = Eigen::MatrixXd::Zero(5, 6);
    for (std::size_t t = 0; t < 60; ++t) {
      Eigen::MatrixXd q(5, 6);
      for (int i = 0; i < 5; ++i) {
        const Eigen::VectorXd diff = (log_mu.row(i) - hat.row(i)).transpose();
        auto rng = key.stream(t, static_cast<std::uint64_t>(i), StreamPurpose::Compression);
        const auto dense = densify(
            compress(spec, std::span<const double>(diff.data(), 6), rng));
        for (int k = 0; k < 6; ++k) q(i, k) = dense[k];
      }
      hat += q;
      const Eigen::MatrixXd pull = a.weights() * hat - hat;
      for (int i = 0; i < 5; ++i) {
        for (int th = 0; th < 6; ++th) {
          log_mu(i, th) += gamma * pull(i, th) +
                           std::log(world.likelihoods[i](
                               th, static_cast<Eigen::Index>(signals.at(t)[i])));
        }
      }
      (void)advance(state, world, a, signals.at(t), spec, key);
    }
    EXPECT_LT((state.log_beliefs() - log_mu).cwiseAbs().maxCoeff(), 1e-9) << spec.label();
    EXPECT_LT((state.log_approximations() - hat).cwiseAbs().maxCoeff(), 1e-9)
        << spec.label();
  }
}

TEST(Learner, MemoryEfficientMatchesStandard) {
  const auto world = seeded_world(9, 5, 3, 4);
  const auto a = mixing_matrix(seeded_graph(TopologyKind::Torus, 9));
  for (const auto& spec : all_kinds()) {
    auto s1 = init_state(world, a, 0.2, uniform_priors(9, 5), LearnerMode::Standard);
    auto s2 = init_state(world, a, 0.2, uniform_priors(9, 5), LearnerMode::MemoryEfficient);
    const SignalTable signals(world, 100, StreamKey{2, 0});
    const StreamKey key{8, 0};
    for (std::size_t t = 0; t < 100; ++t) {
      (void)advance(s1, world, a, signals.at(t), spec, key);
      (void)advance(s2, world, a, signals.at(t), spec, key);
    }
    EXPECT_LT((s1.log_beliefs() - s2.log_beliefs()).cwiseAbs().maxCoeff(), 1e-9)
        << spec.label();
  }
}

TEST(Learner, OracleTracksFullCompression) {
  const auto world = seeded_world(8, 5, 3, 5);
  const auto a = mixing_matrix(seeded_graph(TopologyKind::Complete, 8));
  auto state = init_state(world, a, 0.7, uniform_priors(8, 5), LearnerMode::Standard, true);
  const SignalTable signals(world, 200, StreamKey{3, 0});
  for (std::size_t t = 0; t < 200; ++t) {
    (void)advance(state, world, a, signals.at(t), CompressionSpec::full(), StreamKey{0, 0});
  }
  EXPECT_EQ(state.round, 200u);
  EXPECT_LT((state.log_beliefs() - *state.oracle_log_nu).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Learner, StoredRealsPerMode) {
  const auto world = seeded_world(16, 7, 3, 6);
  const auto topo = seeded_graph(TopologyKind::Torus, 16);
  const auto a = mixing_matrix(topo);
  const auto standard = init_state(world, a, 0.5, uniform_priors(16, 7), LearnerMode::Standard);
  const auto compact =
      init_state(world, a, 0.5, uniform_priors(16, 7), LearnerMode::MemoryEfficient);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(standard.agents[i].stored_reals(), (2 + topo.degree(i)) * 7);
    EXPECT_EQ(compact.agents[i].stored_reals(), 3u * 7);
  }
}

TEST(Learner, InitValidation) {
  const auto world = seeded_world(3, 4, 3, 7);
  const auto a = mixing_matrix(seeded_graph(TopologyKind::Path, 3));
  const auto priors = uniform_priors(3, 4);
  EXPECT_THROW((void)init_state(world, a, 0.0, priors, LearnerMode::Standard),
               std::invalid_argument);
  EXPECT_THROW((void)init_state(world, a, 1.5, priors, LearnerMode::Standard),
               std::invalid_argument);
  Eigen::MatrixXd zero = priors;
  zero(0, 0) = 0.0;
  zero(0, 1) = 0.5;
  EXPECT_THROW((void)init_state(world, a, 0.5, zero, LearnerMode::Standard),
               std::invalid_argument);
  EXPECT_THROW((void)init_state(world, a, 0.5, uniform_priors(3, 5), LearnerMode::Standard),
               std::invalid_argument);
  auto state = init_state(world, a, 0.5, priors, LearnerMode::Standard);
  const std::vector<std::size_t> bad{0, 0, 99};
  EXPECT_THROW((void)advance(state, world, a, bad, CompressionSpec::full(), StreamKey{}),
               std::out_of_range);
  const std::vector<std::size_t> short_signals{0, 0};
  EXPECT_THROW(
      (void)advance(state, world, a, short_signals, CompressionSpec::full(), StreamKey{}),
      std::invalid_argument);
}

TEST(Learner, TheoreticalGamma) {
  // delta = beta = omega = 1: 1 / (32 + 2 + 8 + 4 - 8).
  EXPECT_NEAR(theoretical_gamma(1.0, 1.0, 1.0), 1.0 / 38.0, 1e-15);
  const double d = 1.0 / 3.0;
  const double w = 0.05;
  EXPECT_NEAR(theoretical_gamma(d, 1.0, w),
              d * d * w / (32 * d + 2 * d * d + 8 + 4 * d - 8 * d * w), 1e-15);
  EXPECT_THROW((void)theoretical_gamma(0.0, 1.0, 0.5), std::invalid_argument);
}

TEST(Learner, NormalizeIsShiftInvariant) {
  const Eigen::Vector3d x(1000.0, 1001.0, 999.0);
  const auto p = normalize(x);
  const auto q = normalize(Eigen::Vector3d(0.0, 1.0, -1.0));
  EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
}

}  // namespace
}  // namespace cslearn
