#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cslearn/compression.hpp"
#include "cslearn/config.hpp"
#include "cslearn/diagnostics.hpp"
#include "cslearn/graph.hpp"
#include "cslearn/world.hpp"

namespace cslearn {

/// The fixed part of an experiment: world, graph and their derived data.
struct ExperimentInstance {
  WorldModel world;
  Topology topology;
  MixingMatrix mixing;
  ObjectiveProfile profile;

  /// Index of the unique optimal hypothesis; throws std::domain_error when
  /// the optimum is not unique.
  [[nodiscard]] std::size_t optimum() const;
};

/// World and graph from the configured files, or drawn from `run`'s World
/// and Topology streams.
[[nodiscard]] ExperimentInstance make_instance(const ExperimentConfig& config,
                                               std::uint64_t run = 0);

/// (1/n) sum_i ||mu~_i - e_optimum|| over the rows of `beliefs`.
[[nodiscard]] double convergence_error(const Eigen::MatrixXd& beliefs,
                                       std::size_t optimum);

/// Per round t = 0..T: error, cumulative network-wide bits and every
/// agent's normalized belief on the optimum. Randomized operators are
/// averaged over the configured repeats.
struct RunTrace {
  std::vector<double> error;
  std::vector<std::uint64_t> bits;
  // beliefs[t](i) = mu~_i^t(theta*).
  std::vector<Eigen::VectorXd> belief_star;
  CompressionSpec spec;
  double gamma = 0.0;
  std::uint64_t bits_per_round = 0;
  // First round with error < epsilon.
  std::optional<std::size_t> rounds_to_error;
  // First round with mu~_i(theta) < belief_epsilon for every agent and
  // every non-optimal theta.
  std::optional<std::size_t> rounds_to_beliefs;

  [[nodiscard]] std::size_t rounds() const noexcept {
    return error.empty() ? 0 : error.size() - 1;
  }
};

enum class StopRule { None, Error, Beliefs };

/// 2 |E| encoded_bits(spec, m): one message per direction per edge, none to
/// oneself.
[[nodiscard]] std::uint64_t bits_per_round(const Topology& topology,
                                           const CompressionSpec& spec,
                                           std::size_t m);

/// Runs `spec` with stepsize `gamma` for config.rounds rounds. `run` selects
/// the observation path under Resampled signals and the compression
/// streams; repeats of a randomized operator use runs derived from it.
[[nodiscard]] RunTrace simulate_trace(const ExperimentInstance& instance,
                                      const ExperimentConfig& config,
                                      const CompressionSpec& spec, double gamma,
                                      std::uint64_t run = 0,
                                      StopRule stop = StopRule::None);

/// Candidates {omega/4, omega/2, omega, 2 omega, 4 omega} (or config's
/// explicit grid) clipped to (0, 1], deduplicated, ascending.
[[nodiscard]] std::vector<double> gamma_candidates(const ExperimentConfig& config,
                                                   double omega);

/// Candidate reaching error < epsilon in the fewest rounds on the fixed
/// observation path; ties go to the smaller stepsize, and when none converges
/// the smallest final error wins.
[[nodiscard]] double gamma_grid_search(const ExperimentInstance& instance,
                                       const ExperimentConfig& config,
                                       const CompressionSpec& spec);

/// Stepsize under config's policy.
[[nodiscard]] double resolve_gamma(const ExperimentInstance& instance,
                                   const ExperimentConfig& config,
                                   const CompressionSpec& spec);

/// One configured run: resolves the stepsize and simulates, stopping at
/// error < epsilon when config.stop_at_epsilon is set.
[[nodiscard]] RunTrace run_experiment(const ExperimentConfig& config);

/// Header "t,error,bits,belief_0,..", 12 significant digits.
void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);

/// Paired compressed/reference runs with every diagnostic the analysis
/// offers, for one configured experiment.
struct DiagnosticsReport {
  TheoryConstants constants;
  LyapunovTrace lyapunov;
  std::vector<double> envelope;
  std::vector<bool> recursion_ok;
  // rates(v, t-1) = agent mean of (1/t) log(mu~(theta_v) / mu~(theta*)).
  Eigen::MatrixXd rates;
  // (-(t/2) C1 + C2) - max_{i, v not optimal} log mu~_i^t(theta_v).
  std::vector<double> bound_margin;
  BoundCheck nonasymptotic;
  BoundCheck drift;
  BoundCheck variation;
};

[[nodiscard]] DiagnosticsReport run_diagnostics(const ExperimentInstance& instance,
                                                const ExperimentConfig& config,
                                                const CompressionSpec& spec,
                                                double gamma);

/// Columns t, e_t, z_t, envelope, recursion_ok, rate_<v>.., bound_margin for
/// t = 0..T-1.
void write_diagnostics_csv(std::ostream& out, const DiagnosticsReport& report);
void write_diagnostics_csv(const std::filesystem::path& path,
                           const DiagnosticsReport& report);

struct MonteCarloSummary {
  std::size_t runs = 0;
  // Runs that met the belief threshold within config.rounds.
  std::size_t converged = 0;
  double gamma = 0.0;
  // Over converged runs; NaN when none converged.
  double rounds_mean = 0.0;
  double rounds_stddev = 0.0;
  double bits_mean = 0.0;
  double bits_stddev = 0.0;
};

/// config.runs independent runs (fresh observations, and a fresh world under
/// WorldMode::Resampled) executed on config.threads workers. Results do not
/// depend on the worker count.
[[nodiscard]] MonteCarloSummary monte_carlo(const ExperimentConfig& config,
                                            const CompressionSpec& spec);

/// Operator of the configured family whose omega is `omega` on R^m:
/// k = ceil(omega m) for the sparsifiers, the fewest qsgd bits reaching
/// omega, and Full at omega = 1.
[[nodiscard]] CompressionSpec spec_for_omega(const CompressionSpec& family,
                                             double omega, std::size_t m);

struct SweepCell {
  double omega = 0.0;
  std::size_t agents = 0;
  std::size_t hypotheses = 0;
  CompressionSpec spec;
  MonteCarloSummary summary;
};

/// Monte Carlo over omega x (n or m).
[[nodiscard]] std::vector<SweepCell> sweep(const ExperimentConfig& config);

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);
void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepCell>& cells);

}  // namespace cslearn
