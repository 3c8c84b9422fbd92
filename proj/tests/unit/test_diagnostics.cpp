#include <gtest/gtest.h>

#include <cmath>

#include "cslearn/diagnostics.hpp"
#include "fixtures.hpp"

namespace cslearn {
namespace {

using testing::seeded_graph;
using testing::seeded_world;

struct Setup {
  WorldModel world;
  MixingMatrix mixing;
  SignalTable signals;
};

Setup ring_setup(std::size_t rounds) {
  auto world = seeded_world(5, 5, 4, 31, 0.01);
  auto mixing = mixing_matrix(seeded_graph(TopologyKind::Ring, 5));
  SignalTable signals(world, rounds, StreamKey{31, 0});
  return {std::move(world), std::move(mixing), std::move(signals)};
}

std::vector<RunRecord> paired(const Setup& s, const CompressionSpec& spec, double gamma,
                              std::size_t rounds, std::size_t repeats = 1) {
  PairedRunSetup setup;
  setup.spec = spec;
  setup.gamma = gamma;
  setup.rounds = rounds;
  setup.seed = 5;
  setup.repeats = repeats;
  return simulate_paired(s.world, s.mixing, uniform_priors(5, 5), s.signals, setup);
}

TEST(TheoryConstants, HandComputed) {
  ObjectiveProfile profile;
  profile.values = {0.2, 0.5, 0.9};
  profile.optimal_set = {0};
  profile.optimum = 0.2;
  profile.gap = 0.3;
  TheoryInputs in;
  in.agents = 4;
  in.hypotheses = 9;
  in.delta = 0.5;
  in.beta = 1.0;
  in.gamma = 0.25;
  in.omega = 0.5;
  in.alpha1 = 0.1;
  in.alpha2 = 0.01;
  in.rho = 0.05;
  const auto c = theory_constants(in, profile);
  const double la = std::log(100.0);  // ln(1/alpha), alpha = 0.01
  // sqrt(nm) = 6, delta^2 gamma omega = 1/32.
  EXPECT_NEAR(c.alpha, 0.01, 1e-15);
  EXPECT_NEAR(c.c2, 162.0 * 6.0 * 32.0 * la, 1e-9);
  EXPECT_NEAR(c.g1, 73.0 * 6.0 * 32.0 * la, 1e-9);
  EXPECT_NEAR(c.r, 4.0 * 6.0 * la / 0.125, 1e-12);
  EXPECT_NEAR(c.g2, 16.0 * std::log(4.0) / 0.125 * la, 1e-12);
  EXPECT_NEAR(c.eta, 1.0 - 0.125 / 164.0, 1e-15);
  EXPECT_NEAR(c.l, 0.5 * 1.5 / 0.5, 1e-15);
  ASSERT_TRUE(c.t_rho.has_value());
  EXPECT_NEAR(*c.t_rho, 8.0 / 0.09 * la * la * std::log(20.0), 1e-9);
  EXPECT_EQ(c.c_v, (std::vector<double>{0.0, 0.3, 0.7}));
  EXPECT_NEAR(c.c_v[2], 0.7, 1e-15);
  EXPECT_NEAR(c.gamma_star, theoretical_gamma(0.5, 1.0, 0.5), 1e-15);

  profile.gap = 0.0;
  EXPECT_FALSE(theory_constants(in, profile).t_rho.has_value());
  in.rho = 1.0;
  EXPECT_THROW((void)theory_constants(in, profile), std::invalid_argument);
}

TEST(Lyapunov, InitialTermsMatchClosedForms) {
  const auto s = ring_setup(10);
  const auto rec = paired(s, CompressionSpec::top_k(2), 0.1, 10);
  const auto trace = lyapunov_trace(rec);
  // nu^0 is uniform: z_0 = n m (ln m)^2.
  EXPECT_NEAR(trace.z[0], 25.0 * std::log(5.0) * std::log(5.0), 1e-9);
  // x^0 = 0, so e_0 is the first compression residual of log mu^0, which
  // ties on every coordinate: top_2 drops three equal entries per agent.
  EXPECT_NEAR(trace.x_dev[0], 0.0, 1e-24);
  EXPECT_NEAR(trace.e[0], 15.0 * std::log(5.0) * std::log(5.0), 1e-9);
  EXPECT_LE(trace.e[0], (1.0 - 0.4) * 25.0 * std::log(5.0) * std::log(5.0) + 1e-9);
}

TEST(Lyapunov, LosslessRunHasNoConsensusError) {
  const auto s = ring_setup(200);
  const auto rec = paired(s, CompressionSpec::full(), 0.5, 200);
  const auto trace = lyapunov_trace(rec);
  for (std::size_t t = 0; t < trace.size(); ++t) EXPECT_LT(trace.e[t], 1e-18);
  const auto ok = check_recursion(trace, 1.0 - 1.0 / 164.0, 0.0);
  for (bool b : ok) EXPECT_TRUE(b);
}

TEST(Lyapunov, RecursionAndEnvelopeHoldAtTheoreticalStep) {
  const auto s = ring_setup(300);
  const auto spec = CompressionSpec::top_k(2);
  const double w = omega(spec, 5);
  const double gamma = theoretical_gamma(s.mixing.spectral_gap(), s.mixing.beta(), w);
  const auto rec = paired(s, spec, gamma, 300);
  const auto trace = lyapunov_trace(rec);
  const double eta = 1.0 - std::pow(s.mixing.spectral_gap(), 2) * w / 164.0;
  const double l = (1.0 - w) * (2.0 - w) / w;
  for (bool b : check_recursion(trace, eta, l)) EXPECT_TRUE(b);
  const double r = 4.0 * 5.0 * std::log(100.0) / (gamma * s.mixing.spectral_gap());
  for (bool b : check_envelope(trace, eta, l, r)) EXPECT_TRUE(b);
}

TEST(Lyapunov, EnvelopeFormula) {
  LyapunovTrace trace;
  trace.e = {2.0, 0.0, 0.0, 0.0};
  trace.z = trace.x_dev = trace.hat_dev = {0.0, 0.0, 0.0, 0.0};
  const auto env = geometric_envelope(trace, 0.5, 3.0, 2.0);
  // eta^t e_0 + L R^2 (1 - eta^t) / (1 - eta) = 2 / 2^t + 24 (1 - 2^-t).
  const std::vector<double> expect{2.0, 1.0 + 12.0, 0.5 + 18.0, 0.25 + 21.0};
  for (std::size_t t = 0; t < 4; ++t) EXPECT_NEAR(env[t], expect[t], 1e-14);
  trace.e[2] = 100.0;
  EXPECT_FALSE(check_recursion(trace, 0.5, 3.0)[2]);
  EXPECT_FALSE(check_envelope(trace, 0.5, 3.0, 2.0)[2]);
  EXPECT_TRUE(check_envelope(trace, 0.5, 3.0, 2.0)[3]);
}

TEST(Lyapunov, RejectsMismatchedRecords) {
  const auto s = ring_setup(20);
  auto a = paired(s, CompressionSpec::top_k(2), 0.2, 20);
  auto b = paired(s, CompressionSpec::top_k(2), 0.2, 10);
  std::vector<RunRecord> mixed{a[0], b[0]};
  EXPECT_THROW((void)lyapunov_trace(mixed), std::invalid_argument);
  auto c = a;
  c[0].log_nu[3](0, 0) += 1.0;
  std::vector<RunRecord> diverged{a[0], c[0]};
  EXPECT_THROW((void)lyapunov_trace(diverged), std::invalid_argument);
  EXPECT_THROW((void)lyapunov_trace(std::vector<RunRecord>{}), std::invalid_argument);
}

TEST(RatioRate, MatchesDirectComputation) {
  const auto s = ring_setup(50);
  const auto rec = paired(s, CompressionSpec::rand_k(2), 0.3, 50, 3);
  const auto rates = ratio_rate(rec, 1, 0);
  ASSERT_EQ(rates.cols(), 50);
  for (std::size_t t : {1u, 17u, 50u}) {
    for (int i = 0; i < 5; ++i) {
      double sum = 0.0;
      for (const auto& r : rec) sum += r.log_mu[t](i, 1) - r.log_mu[t](i, 0);
      EXPECT_NEAR(rates(i, static_cast<Eigen::Index>(t - 1)), sum / 3.0 / double(t), 1e-12);
    }
  }
}

TEST(BoundChecks, VariationAndDrift) {
  const auto s = ring_setup(100);
  const auto rec = paired(s, CompressionSpec::qsgd(3), 0.1, 100, 4);
  const auto var = variation_range_check(rec, 1e9);
  EXPECT_TRUE(var.evaluated);
  EXPECT_EQ(var.checked, 101u * 25u);
  EXPECT_EQ(var.violations, 0u);
  EXPECT_GT(variation_range_check(rec, 0.0).violations, 0u);
  const auto trace = lyapunov_trace(rec);
  EXPECT_EQ(drift_radius_check(trace, 1e6).violations, 0u);
  EXPECT_EQ(drift_radius_check(trace, 1e6).checked, 99u);
  EXPECT_GT(drift_radius_check(trace, 1e-6).violations, 0u);
}

TEST(BoundChecks, NonAsymptoticSkipsUnreachableHorizon) {
  const auto s = ring_setup(30);
  const auto rec = paired(s, CompressionSpec::full(), 0.5, 30);
  TheoryConstants c;
  c.c1 = 0.1;
  c.c2 = 5.0;
  c.t_rho = 1e6;
  const auto profile = objective(s.world);
  EXPECT_FALSE(nonasymptotic_check(rec, c, profile).evaluated);
  c.t_rho = 10.0;
  const auto hit = nonasymptotic_check(rec, c, profile);
  EXPECT_TRUE(hit.evaluated);
  EXPECT_EQ(hit.checked, 21u * 5u * 4u);
  c.c2 = -1e9;
  EXPECT_EQ(nonasymptotic_check(rec, c, profile).violations, 21u * 5u * 4u);
}

TEST(LogNormalized, RowsSumToOne) {
  Eigen::MatrixXd x(2, 3);
  x << 1000, 999, 998, -5, 0, 5;
  const auto ln = log_normalized(x);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(ln.row(i).array().exp().sum(), 1.0, 1e-14);
}

}  // namespace
}  // namespace cslearn
