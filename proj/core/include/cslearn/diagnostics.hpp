#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cslearn/compression.hpp"
#include "cslearn/graph.hpp"
#include "cslearn/learner.hpp"
#include "cslearn/world.hpp"

namespace cslearn {

// Convergence constants and bounds from the analysis, all in nats.
//
//   alpha       = min(alpha1, alpha2)
//   C1          = min_{theta not optimal} F(theta) - F*
//   C2          = 162 sqrt(nm) / (delta^2 gamma omega) * ln(1/alpha)
//   T(rho)      = 8 / C1^2 * (ln alpha)^2 * ln(1/rho)
//   R           = 4 sqrt(nm) ln(1/alpha) / (gamma delta)          (drift radius)
//   G1          = 73 sqrt(nm) / (delta^2 gamma omega) * ln(1/alpha) (variation range)
//   G2          = 16 ln(n) / (gamma delta) * ln(1/alpha)
//   eta         = 1 - delta^2 omega / 164
//   L           = (1 - omega)(2 - omega) / omega
struct TheoryInputs {
  std::size_t agents = 1;
  std::size_t hypotheses = 1;
  double delta = 1.0;
  double beta = 0.0;
  double gamma = 1.0;
  double omega = 1.0;
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  double rho = 0.05;
};

struct TheoryConstants {
  double alpha = 0.0;
  double c1 = 0.0;
  // C_v per hypothesis; zero on the optimal set.
  std::vector<double> c_v;
  double c2 = 0.0;
  // Empty when C1 = 0 (every hypothesis optimal).
  std::optional<double> t_rho;
  double r = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double eta = 0.0;
  double l = 0.0;
  double gamma_star = 0.0;
};

[[nodiscard]] TheoryConstants theory_constants(const TheoryInputs& in,
                                               const ObjectiveProfile& profile);

/// States of one compressed run and its uncompressed reference, stacked
/// n x m per round for t = 0..T. log_mu_hat[t] is the approximation after
/// round t's exchange (so log_mu_hat[0] = 0).
struct RunRecord {
  std::vector<Eigen::MatrixXd> log_mu;
  std::vector<Eigen::MatrixXd> log_mu_hat;
  std::vector<Eigen::MatrixXd> log_nu;

  [[nodiscard]] std::size_t rounds() const noexcept {
    return log_mu.empty() ? 0 : log_mu.size() - 1;
  }
};

struct PairedRunSetup {
  CompressionSpec spec;
  double gamma = 1.0;
  LearnerMode mode = LearnerMode::Standard;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  // Independent compression streams (run index r = 0..repeats-1); the
  // observations are shared by all repeats.
  std::size_t repeats = 1;
};

/// Runs `repeats` compressed trajectories next to the reference process,
/// all from `priors` and replaying the same signal table.
[[nodiscard]] std::vector<RunRecord> simulate_paired(
    const WorldModel& world, const MixingMatrix& mixing,
    const Eigen::MatrixXd& priors, const SignalTable& signals,
    const PairedRunSetup& setup);

/// Consensus-error quantities of x = log mu - log nu, x_hat = log mu_hat -
/// log nu_hat, indexed t = 0..T-1 and averaged over repeats:
///   x_dev[t]   = ||X^t - mean(X^t)||_F^2
///   hat_dev[t] = ||X^t - X_hat^{t+1}||_F^2 = ||log mu^t - log mu_hat^{t+1}||_F^2
///   e[t]       = x_dev[t] + hat_dev[t]
///   z[t]       = sum_i ||log nu_i^t - log nu_i^{t-1}||^2 (z[0] uses nu_hat^0 = 1)
struct LyapunovTrace {
  std::vector<double> e;
  std::vector<double> z;
  std::vector<double> x_dev;
  std::vector<double> hat_dev;

  [[nodiscard]] std::size_t size() const noexcept { return e.size(); }
};

/// Throws std::invalid_argument when the records disagree on shape, on the
/// reference trajectory, or do not start from the reference's initial state.
[[nodiscard]] LyapunovTrace lyapunov_trace(std::span<const RunRecord> records);

/// Per round: e_t <= (1 + slack)(eta e_{t-1} + L z_t); entry 0 is true.
[[nodiscard]] std::vector<bool> check_recursion(const LyapunovTrace& trace,
                                                double eta, double l,
                                                double slack = 0.0);

/// eta^t e_0 + L R^2 (1 - eta^t) / (1 - eta) for t = 0..T-1.
[[nodiscard]] std::vector<double> geometric_envelope(const LyapunovTrace& trace,
                                                     double eta, double l,
                                                     double r);

/// Per round: e_t <= (1 + slack) * envelope_t.
[[nodiscard]] std::vector<bool> check_envelope(const LyapunovTrace& trace,
                                               double eta, double l, double r,
                                               double slack = 0.0);

/// (1/t) mean_repeats log(mu_i^t(v) / mu_i^t(w)) for every agent i (rows) and
/// t = 1..T (column t-1).
[[nodiscard]] Eigen::MatrixXd ratio_rate(std::span<const RunRecord> records,
                                         std::size_t v, std::size_t w);

struct BoundCheck {
  bool evaluated = false;
  std::size_t checked = 0;
  std::size_t violations = 0;
  // Smallest (bound - observed) over all checked items; positive means slack.
  double worst_margin = 0.0;
};

/// Counts (i, t, theta_v) with t >= T(rho) and theta_v outside the optimal
/// set where mean_repeats log mu~_i^t(theta_v) > -(t/2) C1 + C2. Not
/// evaluated when T(rho) is undefined or exceeds the run length.
[[nodiscard]] BoundCheck nonasymptotic_check(std::span<const RunRecord> records,
                                             const TheoryConstants& constants,
                                             const ObjectiveProfile& profile);

/// Rounds t >= 1 with z_t > R^2.
[[nodiscard]] BoundCheck drift_radius_check(const LyapunovTrace& trace,
                                            double r);

/// Items (i, theta, t) with |mean_repeats log mu_i^t(theta) - log nu_i^t(theta)| > G1.
[[nodiscard]] BoundCheck variation_range_check(std::span<const RunRecord> records,
                                               double g1);

/// Log-sum-exp normalized log beliefs, row-wise.
[[nodiscard]] Eigen::MatrixXd log_normalized(const Eigen::MatrixXd& log_mu);

}  // namespace cslearn
