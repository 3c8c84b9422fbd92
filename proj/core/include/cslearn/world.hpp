#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "cslearn/rng.hpp"

namespace cslearn {

/// Observation model shared by all agents: a finite hypothesis set, one
/// likelihood table per agent and the (unknown to the agents) true signal
/// distributions.
struct WorldModel {
  // likelihoods[i](theta, s) = l_i(s | theta); each row is a distribution
  // over agent i's alphabet.
  std::vector<Eigen::MatrixXd> likelihoods;
  // truths[i](s) = f_i(s).
  std::vector<Eigen::VectorXd> truths;
  // Every l_i(s | theta) on the support of f_i is at least this value.
  double alpha2 = 1e-3;

  [[nodiscard]] std::size_t agents() const noexcept { return truths.size(); }
  [[nodiscard]] std::size_t hypotheses() const {
    return likelihoods.empty() ? 0
                               : static_cast<std::size_t>(likelihoods[0].rows());
  }
  [[nodiscard]] std::size_t alphabet_size(std::size_t agent) const {
    return static_cast<std::size_t>(truths.at(agent).size());
  }

  /// Checks stochasticity (1e-12), nonnegativity, consistent shapes and the
  /// likelihood floor; throws std::invalid_argument with the offending item.
  void validate() const;

  /// Smallest likelihood over all agents, hypotheses and supported signals.
  [[nodiscard]] double min_supported_likelihood() const;

  bool operator==(const WorldModel&) const = default;
};

/// F(theta) for every hypothesis, its minimizers and the optimality gaps.
struct ObjectiveProfile {
  std::vector<double> values;
  std::vector<std::size_t> optimal_set;
  double optimum = 0.0;
  // min over theta outside the optimal set of F(theta) - F*; zero when every
  // hypothesis is optimal.
  double gap = 0.0;

  [[nodiscard]] bool is_optimal(std::size_t theta) const;
  /// C_v = F(theta_v) - F*.
  [[nodiscard]] double excess(std::size_t theta) const {
    return values.at(theta) - optimum;
  }
};

/// D_KL(f || l) in nats with 0 ln 0 = 0. Throws std::domain_error when
/// l(s) = 0 on the support of f.
[[nodiscard]] double kl(std::span<const double> f, std::span<const double> l);

[[nodiscard]] ObjectiveProfile objective(const WorldModel& world);

struct RandomWorldParams {
  std::size_t agents = 1;
  std::size_t hypotheses = 1;
  std::size_t alphabet_size = 2;
  double alpha2 = 1e-3;
  // Symmetric Dirichlet concentration for all sampled distributions.
  double concentration = 1.0;
  bool require_unique_optimum = true;
  double min_gap = 1e-3;
  std::size_t max_attempts = 10000;
};

/// Samples likelihoods and truths from a symmetric Dirichlet. Likelihood rows
/// are mixed with the uniform floor alpha2, l = alpha2 + (1 - S alpha2) d, so
/// that every entry is at least alpha2.
[[nodiscard]] WorldModel random_world(const RandomWorldParams& params, Rng& rng);

/// One signal index distributed as f_i (inverse CDF on one uniform draw).
[[nodiscard]] std::size_t sample_signal(const WorldModel& world,
                                        std::size_t agent, Rng& rng);

/// Pre-sampled observations: row t holds the n signals of round t + 1.
/// Agent i's column is drawn from its own stream of `key`, so two tables
/// with the same key agree on every common prefix.
class SignalTable {
 public:
  SignalTable(const WorldModel& world, std::size_t rounds, StreamKey key);

  [[nodiscard]] std::size_t rounds() const noexcept { return rounds_; }
  [[nodiscard]] std::size_t agents() const noexcept { return agents_; }
  /// Signals observed at round t + 1 (t is 0-based).
  [[nodiscard]] std::span<const std::size_t> at(std::size_t t) const;

 private:
  std::size_t rounds_;
  std::size_t agents_;
  std::vector<std::size_t> signals_;
};

// Versioned JSON document with row-major decimal probability tables.
void save_world(std::ostream& out, const WorldModel& world);
void save_world(const std::filesystem::path& path, const WorldModel& world);
[[nodiscard]] WorldModel load_world(std::istream& in);
[[nodiscard]] WorldModel load_world(const std::filesystem::path& path);

}  // namespace cslearn
