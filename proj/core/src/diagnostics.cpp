#include "cslearn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cslearn {
namespace {

// Allowance for floating point noise when both sides of an inequality are
// essentially zero (e.g. lossless compression).
constexpr double kRoundoff = 1e-12;

bool within(double lhs, double rhs, double slack) {
  return lhs <= (1.0 + slack) * rhs + kRoundoff * (1.0 + std::abs(rhs));
}

Eigen::MatrixXd mean_log_mu(std::span<const RunRecord> records, std::size_t t) {
  Eigen::MatrixXd sum = records[0].log_mu[t];
  for (std::size_t r = 1; r < records.size(); ++r) sum += records[r].log_mu[t];
  return sum / static_cast<double>(records.size());
}

void check_records(std::span<const RunRecord> records) {
  if (records.empty()) throw std::invalid_argument("no run records");
  const auto& ref = records[0];
  const std::size_t len = ref.log_mu.size();
  if (len == 0 || ref.log_mu_hat.size() != len || ref.log_nu.size() != len) {
    throw std::invalid_argument("run record trajectories differ in length");
  }
  for (const auto& rec : records) {
    if (rec.log_mu.size() != len || rec.log_mu_hat.size() != len ||
        rec.log_nu.size() != len) {
      throw std::invalid_argument("run records differ in length");
    }
    for (std::size_t t = 0; t < len; ++t) {
      if (rec.log_mu[t].rows() != ref.log_mu[0].rows() ||
          rec.log_mu[t].cols() != ref.log_mu[0].cols()) {
        throw std::invalid_argument("run records differ in shape");
      }
      if (rec.log_nu[t] != ref.log_nu[t]) {
        throw std::invalid_argument(
            "run records do not share one reference trajectory");
      }
    }
    if (rec.log_mu[0] != rec.log_nu[0]) {
      throw std::invalid_argument(
          "compressed and reference runs start from different beliefs");
    }
  }
}

}  // namespace

TheoryConstants theory_constants(const TheoryInputs& in,
                                 const ObjectiveProfile& profile) {
  if (!(in.delta > 0.0 && in.delta <= 1.0) || !(in.omega > 0.0 && in.omega <= 1.0) ||
      !(in.gamma > 0.0 && in.gamma <= 1.0) || in.agents == 0 || in.hypotheses == 0) {
    throw std::invalid_argument("theory_constants: parameter out of range");
  }
  if (!(in.alpha1 > 0.0 && in.alpha1 < 1.0) || !(in.alpha2 > 0.0 && in.alpha2 < 1.0) ||
      !(in.rho > 0.0 && in.rho < 1.0)) {
    throw std::invalid_argument(
        "theory_constants: alpha1, alpha2 and rho must lie in (0, 1)");
  }
  TheoryConstants c;
  c.alpha = std::min(in.alpha1, in.alpha2);
  const double log_inv_alpha = std::log(1.0 / c.alpha);
  const double root_nm =
      std::sqrt(static_cast<double>(in.agents) * static_cast<double>(in.hypotheses));
  const double dgw = in.delta * in.delta * in.gamma * in.omega;

  c.c1 = profile.gap;
  c.c_v.reserve(profile.values.size());
  for (std::size_t theta = 0; theta < profile.values.size(); ++theta) {
    c.c_v.push_back(profile.is_optimal(theta) ? 0.0 : profile.excess(theta));
  }
  c.c2 = 162.0 * root_nm / dgw * log_inv_alpha;
  if (c.c1 > 0.0) {
    c.t_rho = 8.0 / (c.c1 * c.c1) * log_inv_alpha * log_inv_alpha *
              std::log(1.0 / in.rho);
  }
  c.r = 4.0 * root_nm * log_inv_alpha / (in.gamma * in.delta);
  c.g1 = 73.0 * root_nm / dgw * log_inv_alpha;
  c.g2 = 16.0 * std::log(static_cast<double>(in.agents)) / (in.gamma * in.delta) *
         log_inv_alpha;
  c.eta = 1.0 - in.delta * in.delta * in.omega / 164.0;
  c.l = (1.0 - in.omega) * (2.0 - in.omega) / in.omega;
  c.gamma_star = theoretical_gamma(in.delta, in.beta, in.omega);
  return c;
}

std::vector<RunRecord> simulate_paired(const WorldModel& world,
                                       const MixingMatrix& mixing,
                                       const Eigen::MatrixXd& priors,
                                       const SignalTable& signals,
                                       const PairedRunSetup& setup) {
  if (setup.repeats == 0) throw std::invalid_argument("repeats must be >= 1");
  if (signals.rounds() < setup.rounds) {
    throw std::invalid_argument("signal table shorter than the requested run");
  }
  std::vector<RunRecord> records;
  records.reserve(setup.repeats);
  for (std::size_t r = 0; r < setup.repeats; ++r) {
    auto state = init_state(world, mixing, setup.gamma, priors, setup.mode, true);
    const StreamKey key{setup.seed, r};
    RunRecord rec;
    rec.log_mu.reserve(setup.rounds + 1);
    rec.log_mu_hat.reserve(setup.rounds + 1);
    rec.log_nu.reserve(setup.rounds + 1);
    auto snapshot = [&] {
      rec.log_mu.push_back(state.log_beliefs());
      rec.log_mu_hat.push_back(state.log_approximations());
      rec.log_nu.push_back(*state.oracle_log_nu);
    };
    snapshot();
    for (std::size_t t = 0; t < setup.rounds; ++t) {
      (void)advance(state, world, mixing, signals.at(t), setup.spec, key);
      snapshot();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

LyapunovTrace lyapunov_trace(std::span<const RunRecord> records) {
  check_records(records);
  const std::size_t rounds = records[0].rounds();
  LyapunovTrace trace;
  trace.e.assign(rounds, 0.0);
  trace.z.assign(rounds, 0.0);
  trace.x_dev.assign(rounds, 0.0);
  trace.hat_dev.assign(rounds, 0.0);
  const double weight = 1.0 / static_cast<double>(records.size());
  for (const auto& rec : records) {
    for (std::size_t t = 0; t < rounds; ++t) {
      const Eigen::MatrixXd x = rec.log_mu[t] - rec.log_nu[t];
      const Eigen::RowVectorXd mean = x.colwise().mean();
      trace.x_dev[t] += weight * (x.rowwise() - mean).squaredNorm();
      trace.hat_dev[t] += weight * (rec.log_mu[t] - rec.log_mu_hat[t + 1]).squaredNorm();
    }
  }
  const auto& nu = records[0].log_nu;
  for (std::size_t t = 0; t < rounds; ++t) {
    trace.e[t] = trace.x_dev[t] + trace.hat_dev[t];
    trace.z[t] = t == 0 ? nu[0].squaredNorm() : (nu[t] - nu[t - 1]).squaredNorm();
  }
  return trace;
}

std::vector<bool> check_recursion(const LyapunovTrace& trace, double eta,
                                  double l, double slack) {
  std::vector<bool> ok(trace.size(), true);
  for (std::size_t t = 1; t < trace.size(); ++t) {
    ok[t] = within(trace.e[t], eta * trace.e[t - 1] + l * trace.z[t], slack);
  }
  return ok;
}

std::vector<double> geometric_envelope(const LyapunovTrace& trace, double eta,
                                       double l, double r) {
  std::vector<double> env(trace.size(), 0.0);
  if (trace.size() == 0) return env;
  const double stationary = l * r * r / (1.0 - eta);
  double eta_t = 1.0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    env[t] = eta_t * trace.e[0] + stationary * (1.0 - eta_t);
    eta_t *= eta;
  }
  return env;
}

std::vector<bool> check_envelope(const LyapunovTrace& trace, double eta,
                                 double l, double r, double slack) {
  const auto env = geometric_envelope(trace, eta, l, r);
  std::vector<bool> ok(trace.size(), true);
  for (std::size_t t = 0; t < trace.size(); ++t) ok[t] = within(trace.e[t], env[t], slack);
  return ok;
}

Eigen::MatrixXd ratio_rate(std::span<const RunRecord> records, std::size_t v,
                           std::size_t w) {
  check_records(records);
  const std::size_t rounds = records[0].rounds();
  const auto n = records[0].log_mu[0].rows();
  const auto m = static_cast<std::size_t>(records[0].log_mu[0].cols());
  if (v >= m || w >= m) throw std::out_of_range("ratio_rate: hypothesis index");
  Eigen::MatrixXd rates(n, static_cast<Eigen::Index>(rounds));
  const auto cv = static_cast<Eigen::Index>(v);
  const auto cw = static_cast<Eigen::Index>(w);
  for (std::size_t t = 1; t <= rounds; ++t) {
    Eigen::VectorXd diff = Eigen::VectorXd::Zero(n);
    for (const auto& rec : records) diff += rec.log_mu[t].col(cv) - rec.log_mu[t].col(cw);
    rates.col(static_cast<Eigen::Index>(t - 1)) =
        diff / (static_cast<double>(records.size()) * static_cast<double>(t));
  }
  return rates;
}

Eigen::MatrixXd log_normalized(const Eigen::MatrixXd& log_mu) {
  Eigen::MatrixXd out(log_mu.rows(), log_mu.cols());
  for (Eigen::Index i = 0; i < log_mu.rows(); ++i) {
    const Eigen::ArrayXd shifted = (log_mu.row(i).array() - log_mu.row(i).maxCoeff()).transpose();
    out.row(i) = (shifted - std::log(shifted.exp().sum())).transpose();
  }
  return out;
}

BoundCheck nonasymptotic_check(std::span<const RunRecord> records,
                               const TheoryConstants& constants,
                               const ObjectiveProfile& profile) {
  check_records(records);
  BoundCheck result;
  result.worst_margin = std::numeric_limits<double>::infinity();
  const std::size_t rounds = records[0].rounds();
  if (!constants.t_rho || *constants.t_rho > static_cast<double>(rounds)) {
    return result;
  }
  result.evaluated = true;
  const auto first = static_cast<std::size_t>(std::ceil(*constants.t_rho));
  for (std::size_t t = first; t <= rounds; ++t) {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(records[0].log_mu[t].rows(),
                                                 records[0].log_mu[t].cols());
    for (const auto& rec : records) mean += log_normalized(rec.log_mu[t]);
    mean /= static_cast<double>(records.size());
    const double bound = -0.5 * static_cast<double>(t) * constants.c1 + constants.c2;
    for (Eigen::Index theta = 0; theta < mean.cols(); ++theta) {
      if (profile.is_optimal(static_cast<std::size_t>(theta))) continue;
      for (Eigen::Index i = 0; i < mean.rows(); ++i) {
        ++result.checked;
        const double margin = bound - mean(i, theta);
        result.worst_margin = std::min(result.worst_margin, margin);
        if (margin < 0.0) ++result.violations;
      }
    }
  }
  return result;
}

BoundCheck drift_radius_check(const LyapunovTrace& trace, double r) {
  BoundCheck result;
  result.evaluated = true;
  result.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t < trace.size(); ++t) {
    ++result.checked;
    const double margin = r * r - trace.z[t];
    result.worst_margin = std::min(result.worst_margin, margin);
    if (margin < 0.0) ++result.violations;
  }
  return result;
}

BoundCheck variation_range_check(std::span<const RunRecord> records, double g1) {
  check_records(records);
  BoundCheck result;
  result.evaluated = true;
  result.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t <= records[0].rounds(); ++t) {
    const Eigen::MatrixXd gap = (mean_log_mu(records, t) - records[0].log_nu[t]).cwiseAbs();
    result.checked += static_cast<std::size_t>(gap.size());
    result.worst_margin = std::min(result.worst_margin, g1 - gap.maxCoeff());
    result.violations += static_cast<std::size_t>((gap.array() > g1).count());
  }
  return result;
}

}  // namespace cslearn
