#include "cslearn/learner.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cslearn {
namespace {

std::span<double> view(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_round_inputs(const NetworkState& state, const WorldModel& world,
                        const MixingMatrix& mixing,
                        std::span<const std::size_t> signals) {
  if (signals.size() != state.size() || mixing.size() != state.size() ||
      world.agents() != state.size()) {
    throw std::invalid_argument(
        "round: agent count differs between state, world, mixing and signals");
  }
}

// Phase 1: every agent compresses its pre-round innovation.
std::vector<CompressedVector> compress_all(const NetworkState& state,
                                           const CompressionSpec& spec,
                                           const StreamKey& key) {
  std::vector<CompressedVector> messages;
  messages.reserve(state.size());
  Eigen::VectorXd innovation;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto& agent = state.agents[i];
    innovation = agent.log_mu - agent.log_mu_hat;
    auto rng = key.stream(state.round, i, StreamPurpose::Compression);
    messages.push_back(compress(spec, view(innovation), rng));
  }
  return messages;
}

void finish_round(NetworkState& state, const WorldModel& world,
                  std::span<const std::size_t> signals) {
  if (state.oracle_log_nu) {
    round_oracle(*state.oracle_log_nu, *state.oracle_mixing, signals, world);
  }
  ++state.round;
}

}  // namespace

std::size_t AgentState::stored_reals() const {
  std::size_t total = static_cast<std::size_t>(log_mu.size() + log_mu_hat.size() +
                                               log_c.size());
  for (const auto& [j, hat] : neighbor_hat) {
    total += static_cast<std::size_t>(hat.size());
  }
  return total;
}

Eigen::MatrixXd NetworkState::log_beliefs() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(size()),
                      static_cast<Eigen::Index>(hypotheses()));
  for (std::size_t i = 0; i < size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = agents[i].log_mu.transpose();
  }
  return out;
}

Eigen::MatrixXd NetworkState::log_approximations() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(size()),
                      static_cast<Eigen::Index>(hypotheses()));
  for (std::size_t i = 0; i < size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = agents[i].log_mu_hat.transpose();
  }
  return out;
}

Eigen::MatrixXd NetworkState::beliefs() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(size()),
                      static_cast<Eigen::Index>(hypotheses()));
  for (std::size_t i = 0; i < size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = normalize(agents[i].log_mu).transpose();
  }
  return out;
}

Eigen::MatrixXd uniform_priors(std::size_t n, std::size_t m) {
  return Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(m),
                                   1.0 / static_cast<double>(m));
}

NetworkState init_state(const WorldModel& world, const MixingMatrix& mixing,
                        double gamma, const Eigen::MatrixXd& priors,
                        LearnerMode mode, bool with_oracle) {
  const std::size_t n = world.agents();
  const std::size_t m = world.hypotheses();
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("stepsize gamma must lie in (0, 1], got " +
                                std::to_string(gamma));
  }
  if (mixing.size() != n) {
    throw std::invalid_argument("mixing matrix size differs from agent count");
  }
  if (static_cast<std::size_t>(priors.rows()) != n ||
      static_cast<std::size_t>(priors.cols()) != m) {
    throw std::invalid_argument("priors must be an n x m matrix");
  }
  for (Eigen::Index i = 0; i < priors.rows(); ++i) {
    if (!(priors.row(i).minCoeff() > 0.0)) {
      throw std::invalid_argument("prior beliefs must be strictly positive");
    }
    if (std::abs(priors.row(i).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("prior beliefs must sum to 1");
    }
  }

  NetworkState state;
  state.gamma = gamma;
  state.mode = mode;
  state.links.resize(n);
  const auto zeros = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && mixing(i, j) > 0.0) state.links[i].push_back(j);
    }
    AgentState agent;
    agent.log_mu = priors.row(static_cast<Eigen::Index>(i)).transpose().array().log();
    agent.log_mu_hat = zeros;
    if (mode == LearnerMode::MemoryEfficient) {
      agent.log_c = zeros;
    } else {
      for (auto j : state.links[i]) agent.neighbor_hat.emplace_back(j, zeros);
    }
    state.agents.push_back(std::move(agent));
  }
  if (with_oracle) {
    state.oracle_log_nu = state.log_beliefs();
    state.oracle_mixing = damped(mixing, gamma).weights();
  }
  return state;
}

Eigen::MatrixXd log_likelihoods(const WorldModel& world,
                                std::span<const std::size_t> signals) {
  const auto n = world.agents();
  if (signals.size() != n) {
    throw std::invalid_argument("expected one signal per agent");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(world.hypotheses()));
  for (std::size_t i = 0; i < n; ++i) {
    if (signals[i] >= world.alphabet_size(i)) {
      throw std::out_of_range("signal " + std::to_string(signals[i]) +
                              " outside agent " + std::to_string(i) +
                              "'s alphabet");
    }
    const auto column = world.likelihoods[i].col(static_cast<Eigen::Index>(signals[i]));
    if (!(column.minCoeff() > 0.0)) {
      throw std::domain_error("zero likelihood for an observed signal at agent " +
                              std::to_string(i));
    }
    out.row(static_cast<Eigen::Index>(i)) = column.array().log().transpose();
  }
  return out;
}

std::vector<CompressedVector> round_standard(NetworkState& state,
                                             const WorldModel& world,
                                             const MixingMatrix& mixing,
                                             std::span<const std::size_t> signals,
                                             const CompressionSpec& spec,
                                             const StreamKey& key) {
  if (state.mode != LearnerMode::Standard) {
    throw std::logic_error("round_standard on a memory-efficient state");
  }
  check_round_inputs(state, world, mixing, signals);
  const Eigen::MatrixXd loglik = log_likelihoods(world, signals);
  auto messages = compress_all(state, spec, key);

  // Phase 2a: everyone folds in its own and its neighbors' messages.
  for (std::size_t i = 0; i < state.size(); ++i) {
    auto& agent = state.agents[i];
    accumulate(messages[i], 1.0, view(agent.log_mu_hat));
    for (auto& [j, hat] : agent.neighbor_hat) accumulate(messages[j], 1.0, view(hat));
  }
  // Phase 2b: consensus step on the refreshed approximations plus the local
  // Bayesian factor.
  Eigen::VectorXd pull;
  for (std::size_t i = 0; i < state.size(); ++i) {
    auto& agent = state.agents[i];
    pull.setZero(agent.log_mu.size());
    for (const auto& [j, hat] : agent.neighbor_hat) {
      pull += mixing(i, j) * (hat - agent.log_mu_hat);
    }
    agent.log_mu += state.gamma * pull +
                    loglik.row(static_cast<Eigen::Index>(i)).transpose();
  }
  finish_round(state, world, signals);
  return messages;
}

std::vector<CompressedVector> round_memory_efficient(
    NetworkState& state, const WorldModel& world, const MixingMatrix& mixing,
    std::span<const std::size_t> signals, const CompressionSpec& spec,
    const StreamKey& key) {
  if (state.mode != LearnerMode::MemoryEfficient) {
    throw std::logic_error("round_memory_efficient on a standard state");
  }
  check_round_inputs(state, world, mixing, signals);
  const Eigen::MatrixXd loglik = log_likelihoods(world, signals);
  auto messages = compress_all(state, spec, key);

  for (std::size_t i = 0; i < state.size(); ++i) {
    auto& agent = state.agents[i];
    accumulate(messages[i], 1.0, view(agent.log_mu_hat));
    accumulate(messages[i], mixing(i, i), view(agent.log_c));
    for (auto j : state.links[i]) {
      accumulate(messages[j], mixing(i, j), view(agent.log_c));
    }
    agent.log_mu += state.gamma * (agent.log_c - agent.log_mu_hat) +
                    loglik.row(static_cast<Eigen::Index>(i)).transpose();
  }
  finish_round(state, world, signals);
  return messages;
}

std::vector<CompressedVector> advance(NetworkState& state,
                                      const WorldModel& world,
                                      const MixingMatrix& mixing,
                                      std::span<const std::size_t> signals,
                                      const CompressionSpec& spec,
                                      const StreamKey& key) {
  return state.mode == LearnerMode::Standard
             ? round_standard(state, world, mixing, signals, spec, key)
             : round_memory_efficient(state, world, mixing, signals, spec, key);
}

void round_oracle(Eigen::MatrixXd& log_nu, const Eigen::MatrixXd& damped_mixing,
                  std::span<const std::size_t> signals, const WorldModel& world) {
  if (damped_mixing.rows() != log_nu.rows() ||
      damped_mixing.cols() != log_nu.rows()) {
    throw std::invalid_argument("round_oracle: mixing matrix shape mismatch");
  }
  log_nu = damped_mixing * log_nu + log_likelihoods(world, signals);
}

Eigen::VectorXd normalize(const Eigen::Ref<const Eigen::VectorXd>& log_mu) {
  if (log_mu.size() == 0) throw std::invalid_argument("normalize: empty vector");
  const double top = log_mu.maxCoeff();
  if (!std::isfinite(top)) {
    throw std::domain_error("normalize: beliefs must be finite");
  }
  Eigen::VectorXd out = (log_mu.array() - top).exp().matrix();
  return out / out.sum();
}

double theoretical_gamma(double delta, double beta, double omega) {
  if (!(delta > 0.0 && delta <= 1.0) || !(omega > 0.0 && omega <= 1.0) ||
      !(beta >= 0.0)) {
    throw std::invalid_argument(
        "theoretical_gamma needs delta, omega in (0, 1] and beta >= 0");
  }
  const double b2 = beta * beta;
  return delta * delta * omega /
         (32.0 * delta + 2.0 * delta * delta + 8.0 * b2 + 4.0 * delta * b2 -
          8.0 * delta * omega);
}

}  // namespace cslearn
