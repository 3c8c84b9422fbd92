#include "cslearn/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "cslearn/learner.hpp"

namespace cslearn {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string real(double v) { return fmt::format("{:.12g}", v); }

StreamKey signal_key(const ExperimentConfig& config, std::uint64_t run,
                     std::uint64_t repeat) {
  if (config.signals == SignalMode::FixedSequence) return {config.seed, run};
  return {derive_seed(config.seed, run, repeat, 0, StreamPurpose::Signals), 0};
}

StreamKey compression_key(const ExperimentConfig& config, std::uint64_t run,
                          std::uint64_t repeat) {
  return {derive_seed(config.seed, run, repeat, 0, StreamPurpose::Compression), 0};
}

bool beliefs_settled(const Eigen::MatrixXd& beliefs, const ObjectiveProfile& profile,
                     double threshold) {
  for (Eigen::Index theta = 0; theta < beliefs.cols(); ++theta) {
    if (profile.is_optimal(static_cast<std::size_t>(theta))) continue;
    if (!(beliefs.col(theta).maxCoeff() < threshold)) return false;
  }
  return true;
}

void summarize(const std::vector<double>& xs, double& mean, double& stddev) {
  if (xs.empty()) {
    mean = stddev = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  stddev = xs.size() > 1 ? std::sqrt(sq / static_cast<double>(xs.size() - 1)) : 0.0;
}

}  // namespace

std::size_t ExperimentInstance::optimum() const {
  if (profile.optimal_set.size() != 1) {
    throw std::domain_error(
        "convergence error needs a unique optimal hypothesis; this world has " +
        std::to_string(profile.optimal_set.size()));
  }
  return profile.optimal_set.front();
}

ExperimentInstance make_instance(const ExperimentConfig& config, std::uint64_t run) {
  const StreamKey key{config.seed, run};
  auto topology = [&] {
    if (config.topology_file) return read_topology(*config.topology_file);
    auto params = config.topology_params;
    if (config.topology == TopologyKind::ErdosRenyi && params.er_probability == 0.0) {
      params.er_probability = er_sparse_probability(config.agents);
    }
    auto rng = key.stream(0, 0, StreamPurpose::Topology);
    return build_graph(config.topology, config.agents, params, rng);
  }();
  auto world = [&] {
    if (config.world_file) return load_world(*config.world_file);
    RandomWorldParams params;
    params.agents = topology.size();
    params.hypotheses = config.hypotheses;
    params.alphabet_size = config.alphabet_size;
    params.alpha2 = config.alpha2;
    params.min_gap = config.min_gap;
    auto rng = key.stream(0, 0, StreamPurpose::World);
    return random_world(params, rng);
  }();
  if (world.agents() != topology.size()) {
    throw std::invalid_argument("world has " + std::to_string(world.agents()) +
                                " agents but the topology has " +
                                std::to_string(topology.size()));
  }
  auto mixing = mixing_matrix(topology);
  auto profile = objective(world);
  return ExperimentInstance{std::move(world), std::move(topology), std::move(mixing),
                            std::move(profile)};
}

double convergence_error(const Eigen::MatrixXd& beliefs, std::size_t optimum) {
  if (beliefs.rows() == 0) throw std::invalid_argument("no agents");
  if (optimum >= static_cast<std::size_t>(beliefs.cols())) {
    throw std::out_of_range("optimal hypothesis index out of range");
  }
  Eigen::MatrixXd diff = beliefs;
  diff.col(static_cast<Eigen::Index>(optimum)).array() -= 1.0;
  return diff.rowwise().norm().mean();
}

std::uint64_t bits_per_round(const Topology& topology, const CompressionSpec& spec,
                             std::size_t m) {
  return 2 * static_cast<std::uint64_t>(topology.edges().size()) * encoded_bits(spec, m);
}

RunTrace simulate_trace(const ExperimentInstance& instance,
                        const ExperimentConfig& config, const CompressionSpec& spec,
                        double gamma, std::uint64_t run, StopRule stop) {
  const auto& world = instance.world;
  const std::size_t n = world.agents();
  const std::size_t m = world.hypotheses();
  spec.validate(m);
  const std::size_t optimum = instance.optimum();
  const std::size_t repeats = spec.randomized() ? config.repeats : 1;
  const auto priors = uniform_priors(n, m);

  std::vector<SignalTable> signals;
  std::vector<NetworkState> states;
  std::vector<StreamKey> keys;
  for (std::size_t r = 0; r < repeats; ++r) {
    signals.emplace_back(world, config.rounds, signal_key(config, run, r));
    states.push_back(init_state(world, instance.mixing, gamma, priors, config.mode));
    keys.push_back(compression_key(config, run, r));
  }

  RunTrace trace;
  trace.spec = spec;
  trace.gamma = gamma;
  trace.bits_per_round = bits_per_round(instance.topology, spec, m);
  const auto record = [&](std::size_t t) {
    Eigen::MatrixXd beliefs = states[0].beliefs();
    for (std::size_t r = 1; r < repeats; ++r) beliefs += states[r].beliefs();
    beliefs /= static_cast<double>(repeats);
    const double error = convergence_error(beliefs, optimum);
    trace.error.push_back(error);
    trace.bits.push_back(static_cast<std::uint64_t>(t) * trace.bits_per_round);
    trace.belief_star.push_back(beliefs.col(static_cast<Eigen::Index>(optimum)));
    if (!trace.rounds_to_error && error < config.epsilon) trace.rounds_to_error = t;
    if (!trace.rounds_to_beliefs &&
        beliefs_settled(beliefs, instance.profile, config.belief_epsilon)) {
      trace.rounds_to_beliefs = t;
    }
  };
  const auto done = [&] {
    return (stop == StopRule::Error && trace.rounds_to_error) ||
           (stop == StopRule::Beliefs && trace.rounds_to_beliefs);
  };

  record(0);
  for (std::size_t t = 1; t <= config.rounds && !done(); ++t) {
    for (std::size_t r = 0; r < repeats; ++r) {
      (void)advance(states[r], world, instance.mixing, signals[r].at(t - 1), spec,
                    keys[r]);
    }
    record(t);
  }
  return trace;
}

std::vector<double> gamma_candidates(const ExperimentConfig& config, double omega) {
  std::vector<double> grid = config.gamma_grid;
  if (grid.empty()) {
    grid = {omega / 4.0, omega / 2.0, omega, 2.0 * omega, 4.0 * omega};
  }
  std::vector<double> out;
  for (double g : grid) {
    if (g > 0.0) out.push_back(std::min(g, 1.0));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw std::invalid_argument("learning.grid: no candidate in (0, 1]");
  return out;
}

double gamma_grid_search(const ExperimentInstance& instance,
                         const ExperimentConfig& config, const CompressionSpec& spec) {
  const auto candidates =
      gamma_candidates(config, omega(spec, instance.world.hypotheses()));
  auto fixed = config;
  fixed.signals = SignalMode::FixedSequence;

  double best_gamma = candidates.front();
  std::optional<std::size_t> best_rounds;
  double best_error = std::numeric_limits<double>::infinity();
  for (double g : candidates) {
    const auto trace = simulate_trace(instance, fixed, spec, g, 0, StopRule::Error);
    if (trace.rounds_to_error) {
      if (!best_rounds || *trace.rounds_to_error < *best_rounds) {
        best_rounds = trace.rounds_to_error;
        best_gamma = g;
      }
    } else if (!best_rounds && trace.error.back() < best_error) {
      best_error = trace.error.back();
      best_gamma = g;
    }
  }
  return best_gamma;
}

double resolve_gamma(const ExperimentInstance& instance, const ExperimentConfig& config,
                     const CompressionSpec& spec) {
  switch (config.gamma_policy) {
    case GammaPolicy::Fixed:
      return config.gamma;
    case GammaPolicy::GridSearch:
      return gamma_grid_search(instance, config, spec);
    case GammaPolicy::Theoretical:
      break;
  }
  return theoretical_gamma(instance.mixing.spectral_gap(), instance.mixing.beta(),
                           omega(spec, instance.world.hypotheses()));
}

RunTrace run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto instance = make_instance(config);
  const double gamma = resolve_gamma(instance, config, config.compression);
  return simulate_trace(instance, config, config.compression, gamma, 0,
                        config.stop_at_epsilon ? StopRule::Error : StopRule::None);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  const std::size_t n =
      trace.belief_star.empty() ? 0 : static_cast<std::size_t>(trace.belief_star[0].size());
  std::string line = "t,error,bits";
  for (std::size_t i = 0; i < n; ++i) line += fmt::format(",belief_{}", i);
  out << line << '\n';
  for (std::size_t t = 0; t < trace.error.size(); ++t) {
    line = fmt::format("{},{},{}", t, real(trace.error[t]), trace.bits[t]);
    for (std::size_t i = 0; i < n; ++i) {
      line += ',';
      line += real(trace.belief_star[t](static_cast<Eigen::Index>(i)));
    }
    out << line << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace) {
  auto out = open_output(path);
  write_trace_csv(out, trace);
  finish_output(out, path);
}

DiagnosticsReport run_diagnostics(const ExperimentInstance& instance,
                                  const ExperimentConfig& config,
                                  const CompressionSpec& spec, double gamma) {
  const auto& world = instance.world;
  const std::size_t n = world.agents();
  const std::size_t m = world.hypotheses();
  spec.validate(m);
  const auto priors = uniform_priors(n, m);
  const SignalTable signals(world, config.rounds, signal_key(config, 0, 0));

  PairedRunSetup setup;
  setup.spec = spec;
  setup.gamma = gamma;
  setup.mode = config.mode;
  setup.rounds = config.rounds;
  setup.seed = derive_seed(config.seed, 0, 0, 0, StreamPurpose::Compression);
  setup.repeats = spec.randomized() ? config.repeats : 1;
  const auto records = simulate_paired(world, instance.mixing, priors, signals, setup);

  TheoryInputs in;
  in.agents = n;
  in.hypotheses = m;
  in.delta = instance.mixing.spectral_gap();
  in.beta = instance.mixing.beta();
  in.gamma = gamma;
  in.omega = omega(spec, m);
  in.alpha1 = priors.minCoeff();
  in.alpha2 = world.alpha2;
  in.rho = config.rho;

  DiagnosticsReport report;
  report.constants = theory_constants(in, instance.profile);
  const auto& c = report.constants;
  report.lyapunov = lyapunov_trace(records);
  report.envelope = geometric_envelope(report.lyapunov, c.eta, c.l, c.r);
  report.recursion_ok = check_recursion(report.lyapunov, c.eta, c.l);
  report.nonasymptotic = nonasymptotic_check(records, c, instance.profile);
  report.drift = drift_radius_check(report.lyapunov, c.r);
  report.variation = variation_range_check(records, c.g1);

  const std::size_t reference = instance.profile.optimal_set.front();
  const std::size_t rounds = config.rounds;
  report.rates.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(rounds));
  for (std::size_t v = 0; v < m; ++v) {
    report.rates.row(static_cast<Eigen::Index>(v)) =
        ratio_rate(records, v, reference).colwise().mean();
  }
  report.bound_margin.resize(rounds);
  for (std::size_t t = 0; t < rounds; ++t) {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(m));
    for (const auto& rec : records) mean += log_normalized(rec.log_mu[t]);
    mean /= static_cast<double>(records.size());
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < m; ++v) {
      if (instance.profile.is_optimal(v)) continue;
      worst = std::max(worst, mean.col(static_cast<Eigen::Index>(v)).maxCoeff());
    }
    report.bound_margin[t] = -0.5 * static_cast<double>(t) * c.c1 + c.c2 - worst;
  }
  return report;
}

void write_diagnostics_csv(std::ostream& out, const DiagnosticsReport& report) {
  const auto m = report.rates.rows();
  std::string line = "t,e_t,z_t,envelope,recursion_ok";
  for (Eigen::Index v = 0; v < m; ++v) line += fmt::format(",rate_{}", v);
  out << line << ",bound_margin\n";
  for (std::size_t t = 0; t < report.lyapunov.size(); ++t) {
    line = fmt::format("{},{},{},{},{}", t, real(report.lyapunov.e[t]),
                       real(report.lyapunov.z[t]), real(report.envelope[t]),
                       report.recursion_ok[t] ? 1 : 0);
    for (Eigen::Index v = 0; v < m; ++v) {
      line += ',';
      // Rates are defined from t = 1.
      line += t == 0 ? std::string("0")
                     : real(report.rates(v, static_cast<Eigen::Index>(t - 1)));
    }
    out << line << ',' << real(report.bound_margin[t]) << '\n';
  }
}

void write_diagnostics_csv(const std::filesystem::path& path,
                           const DiagnosticsReport& report) {
  auto out = open_output(path);
  write_diagnostics_csv(out, report);
  finish_output(out, path);
}

MonteCarloSummary monte_carlo(const ExperimentConfig& config, const CompressionSpec& spec) {
  config.validate();
  auto single = config;
  single.repeats = 1;
  const auto shared = make_instance(config, 0);
  MonteCarloSummary summary;
  summary.runs = config.runs;
  summary.gamma = resolve_gamma(shared, config, spec);

  std::vector<std::optional<std::size_t>> rounds(config.runs);
  std::vector<std::exception_ptr> errors(config.runs);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t r = next++; r < config.runs; r = next++) {
      try {
        const auto trace = [&] {
          if (config.world == WorldMode::Resampled) {
            const auto own = make_instance(config, r + 1);
            return simulate_trace(own, single, spec, summary.gamma, r + 1,
                                  StopRule::Beliefs);
          }
          return simulate_trace(shared, single, spec, summary.gamma, r + 1,
                                StopRule::Beliefs);
        }();
        rounds[r] = trace.rounds_to_beliefs;
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  std::size_t threads = config.threads != 0 ? config.threads
                                            : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, config.runs);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const auto bpr = bits_per_round(shared.topology, spec, shared.world.hypotheses());
  std::vector<double> r_values;
  std::vector<double> b_values;
  for (const auto& r : rounds) {
    if (!r) continue;
    r_values.push_back(static_cast<double>(*r));
    b_values.push_back(static_cast<double>(*r) * static_cast<double>(bpr));
  }
  summary.converged = r_values.size();
  summarize(r_values, summary.rounds_mean, summary.rounds_stddev);
  summarize(b_values, summary.bits_mean, summary.bits_stddev);
  return summary;
}

CompressionSpec spec_for_omega(const CompressionSpec& family, double omega_target,
                               std::size_t m) {
  if (!(omega_target > 0.0 && omega_target <= 1.0)) {
    throw std::invalid_argument("omega must lie in (0, 1]");
  }
  if (family.kind == CompressionKind::Full || omega_target >= 1.0) {
    return CompressionSpec::full(family.scalar_bits);
  }
  if (family.kind == CompressionKind::TopK || family.kind == CompressionKind::RandK) {
    const auto k = static_cast<std::size_t>(
        std::ceil(omega_target * static_cast<double>(m) - 1e-9));
    const std::size_t kept = std::clamp<std::size_t>(k, 1, m);
    return family.kind == CompressionKind::TopK
               ? CompressionSpec::top_k(kept, family.scalar_bits)
               : CompressionSpec::rand_k(kept, family.scalar_bits);
  }
  const bool det = family.kind == CompressionKind::QsgdDeterministic;
  for (std::size_t bits = 2; bits <= 53; ++bits) {
    const auto spec = CompressionSpec::qsgd(bits, det, family.scalar_bits);
    if (omega(spec, m) >= omega_target) return spec;
  }
  throw std::invalid_argument("no qsgd precision reaches the requested omega");
}

std::vector<SweepCell> sweep(const ExperimentConfig& config) {
  config.validate();
  const bool by_agents = config.sweep_axis == SweepAxis::Agents;
  if (by_agents ? config.topology_file.has_value() : config.world_file.has_value()) {
    throw std::invalid_argument(
        "sweep.axis: cannot vary a dimension fixed by a network or world file");
  }
  auto values = config.sweep_values;
  if (values.empty()) values.push_back(by_agents ? config.agents : config.hypotheses);
  std::vector<SweepCell> cells;
  for (std::size_t value : values) {
    auto cell_config = config;
    (by_agents ? cell_config.agents : cell_config.hypotheses) = value;
    for (double w : config.sweep_omegas) {
      SweepCell cell;
      cell.omega = w;
      cell.agents = cell_config.agents;
      cell.hypotheses = cell_config.hypotheses;
      cell.spec = spec_for_omega(config.compression, w, cell_config.hypotheses);
      cell.summary = monte_carlo(cell_config, cell.spec);
      cells.push_back(cell);
    }
  }
  return cells;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "omega,n,m,operator,gamma,runs,converged,rounds_mean,rounds_stddev,"
         "bits_mean,bits_stddev\n";
  for (const auto& c : cells) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", real(c.omega), c.agents,
                       c.hypotheses, c.spec.label(), real(c.summary.gamma),
                       c.summary.runs, c.summary.converged, real(c.summary.rounds_mean),
                       real(c.summary.rounds_stddev), real(c.summary.bits_mean),
                       real(c.summary.bits_stddev));
  }
}

void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepCell>& cells) {
  auto out = open_output(path);
  write_sweep_csv(out, cells);
  finish_output(out, path);
}

}  // namespace cslearn
