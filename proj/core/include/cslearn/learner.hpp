#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cslearn/compression.hpp"
#include "cslearn/graph.hpp"
#include "cslearn/rng.hpp"
#include "cslearn/world.hpp"

namespace cslearn {

enum class LearnerMode {
  // Every agent keeps a copy of each neighbor's approximation.
  Standard,
  // Every agent keeps log mu, log mu_hat and the weighted neighbor
  // aggregate log c: 3m reals regardless of degree.
  MemoryEfficient,
};

/// Per-agent beliefs, all in the log domain (nats). Nothing here is
/// normalized; normalization is only applied for reporting.
struct AgentState {
  Eigen::VectorXd log_mu;
  Eigen::VectorXd log_mu_hat;
  // MemoryEfficient only; empty otherwise.
  Eigen::VectorXd log_c;
  // Standard only: (neighbor j, local copy of log mu_hat_j), sorted by j.
  std::vector<std::pair<std::size_t, Eigen::VectorXd>> neighbor_hat;

  /// Number of belief reals this agent stores.
  [[nodiscard]] std::size_t stored_reals() const;
};

struct NetworkState {
  std::vector<AgentState> agents;
  // Neighbors j != i with A_ij > 0.
  std::vector<std::vector<std::size_t>> links;
  std::size_t round = 0;
  double gamma = 1.0;
  LearnerMode mode = LearnerMode::Standard;
  // Uncompressed reference process log nu (n x m) and its damped mixing
  // matrix B = (1 - gamma) I + gamma A; present iff diagnostics are enabled.
  std::optional<Eigen::MatrixXd> oracle_log_nu;
  std::optional<Eigen::MatrixXd> oracle_mixing;

  [[nodiscard]] std::size_t size() const noexcept { return agents.size(); }
  [[nodiscard]] std::size_t hypotheses() const {
    return agents.empty() ? 0 : static_cast<std::size_t>(agents[0].log_mu.size());
  }
  /// Stacked log mu, one row per agent.
  [[nodiscard]] Eigen::MatrixXd log_beliefs() const;
  /// Stacked log mu_hat, one row per agent.
  [[nodiscard]] Eigen::MatrixXd log_approximations() const;
  /// Normalized beliefs, one row per agent.
  [[nodiscard]] Eigen::MatrixXd beliefs() const;
};

[[nodiscard]] Eigen::MatrixXd uniform_priors(std::size_t n, std::size_t m);

/// Starts every agent at its prior with log mu_hat = log c = 0 and, when
/// `with_oracle` is set, the reference process at the same prior.
[[nodiscard]] NetworkState init_state(const WorldModel& world,
                                      const MixingMatrix& mixing, double gamma,
                                      const Eigen::MatrixXd& priors,
                                      LearnerMode mode,
                                      bool with_oracle = false);

/// ln l_i(s_i | theta) for every agent (rows) and hypothesis (columns).
[[nodiscard]] Eigen::MatrixXd log_likelihoods(const WorldModel& world,
                                              std::span<const std::size_t> signals);

/// One synchronous round with per-neighbor approximation copies. All
/// messages are computed from the pre-round state; compression randomness
/// for agent i comes from key.stream(round, i, Compression).
std::vector<CompressedVector> round_standard(NetworkState& state,
                                             const WorldModel& world,
                                             const MixingMatrix& mixing,
                                             std::span<const std::size_t> signals,
                                             const CompressionSpec& spec,
                                             const StreamKey& key);

/// Same trajectory as round_standard, storing only the weighted aggregate of
/// the neighbors' approximations.
std::vector<CompressedVector> round_memory_efficient(
    NetworkState& state, const WorldModel& world, const MixingMatrix& mixing,
    std::span<const std::size_t> signals, const CompressionSpec& spec,
    const StreamKey& key);

/// Dispatches on state.mode.
std::vector<CompressedVector> advance(NetworkState& state,
                                      const WorldModel& world,
                                      const MixingMatrix& mixing,
                                      std::span<const std::size_t> signals,
                                      const CompressionSpec& spec,
                                      const StreamKey& key);

/// log nu <- B log nu + log-likelihoods.
void round_oracle(Eigen::MatrixXd& log_nu, const Eigen::MatrixXd& damped_mixing,
                  std::span<const std::size_t> signals, const WorldModel& world);

/// Softmax of a log-belief vector with max shift.
[[nodiscard]] Eigen::VectorXd normalize(const Eigen::Ref<const Eigen::VectorXd>& log_mu);

/// Stepsize delta^2 omega / (32 delta + 2 delta^2 + 8 beta^2 + 4 delta beta^2
/// - 8 delta omega) under which the compressed consensus error contracts.
[[nodiscard]] double theoretical_gamma(double delta, double beta, double omega);

}  // namespace cslearn
