// Command line driver: single runs, Monte Carlo sweeps, stepsize search,
// spectral data of a topology file and SVG plots of trace files.

#include <fmt/format.h>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cslearn/config.hpp"
#include "cslearn/experiment.hpp"
#include "cslearn/graph.hpp"
#include "cslearn/plot.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> rounds;
  fs::path out_dir = ".";
  bool diagnostics = false;
};

cslearn::ExperimentConfig load(const fs::path& path, const Overrides& o) {
  auto config = cslearn::load_config(path);
  if (o.seed) config.seed = *o.seed;
  if (o.rounds) config.rounds = *o.rounds;
  config.validate();
  return config;
}

fs::path prepare(const Overrides& o, const std::string& file) {
  fs::create_directories(o.out_dir);
  return o.out_dir / file;
}

std::string optional_count(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string("not reached");
}

int run(const fs::path& config_path, const Overrides& o) {
  const auto config = load(config_path, o);
  const auto instance = cslearn::make_instance(config);
  const auto& spec = config.compression;
  const double gamma = cslearn::resolve_gamma(instance, config, spec);
  const auto trace = cslearn::simulate_trace(
      instance, config, spec, gamma, 0,
      config.stop_at_epsilon ? cslearn::StopRule::Error : cslearn::StopRule::None);
  const auto csv = prepare(o, spec.label() + ".csv");
  cslearn::write_trace_csv(csv, trace);
  fmt::print("operator {}  gamma {:.6g}  omega {:.6g}  delta {:.6g}\n", spec.label(),
             gamma, cslearn::omega(spec, instance.world.hypotheses()),
             instance.mixing.spectral_gap());
  fmt::print("rounds {}  final error {:.6g}  bits {}\n", trace.rounds(),
             trace.error.back(), trace.bits.back());
  fmt::print("error < {:g} at round {}\n", config.epsilon,
             optional_count(trace.rounds_to_error));
  fmt::print("trace written to {}\n", csv.string());

  if (o.diagnostics) {
    const auto report = cslearn::run_diagnostics(instance, config, spec, gamma);
    const auto path = prepare(o, spec.label() + "_diagnostics.csv");
    cslearn::write_diagnostics_csv(path, report);
    std::size_t recursion_bad = 0;
    for (bool ok : report.recursion_ok) recursion_bad += ok ? 0 : 1;
    const auto& c = report.constants;
    fmt::print("C1 {:.6g}  C2 {:.6g}  R {:.6g}  G1 {:.6g}  eta {:.9g}  L {:.6g}\n", c.c1,
               c.c2, c.r, c.g1, c.eta, c.l);
    fmt::print("recursion violations {}  drift violations {}  variation violations {}\n",
               recursion_bad, report.drift.violations, report.variation.violations);
    if (report.nonasymptotic.evaluated) {
      fmt::print("non-asymptotic bound: {} violations of {} checks\n",
                 report.nonasymptotic.violations, report.nonasymptotic.checked);
    } else {
      fmt::print("non-asymptotic bound: T(rho) beyond the run, not evaluated\n");
    }
    fmt::print("diagnostics written to {}\n", path.string());
  }
  return 0;
}

int sweep(const fs::path& config_path, const Overrides& o) {
  const auto config = load(config_path, o);
  const auto cells = cslearn::sweep(config);
  const auto path = prepare(o, "sweep.csv");
  cslearn::write_sweep_csv(path, cells);
  for (const auto& c : cells) {
    fmt::print("omega {:<8g} n {:<5} m {:<5} {:<14} converged {}/{}  bits {:.6g}\n",
               c.omega, c.agents, c.hypotheses, c.spec.label(), c.summary.converged,
               c.summary.runs, c.summary.bits_mean);
  }
  fmt::print("sweep written to {}\n", path.string());
  return 0;
}

int gamma_search(const fs::path& config_path, const Overrides& o) {
  const auto config = load(config_path, o);
  const auto instance = cslearn::make_instance(config);
  const auto& spec = config.compression;
  const double w = cslearn::omega(spec, instance.world.hypotheses());
  fmt::print("operator {}  omega {:.6g}\n", spec.label(), w);
  std::string grid;
  for (double g : cslearn::gamma_candidates(config, w)) grid += fmt::format(" {:.6g}", g);
  fmt::print("candidates{}\n", grid);
  fmt::print("selected gamma {:.12g}\n", cslearn::gamma_grid_search(instance, config, spec));
  return 0;
}

int spectral(const fs::path& topology_path) {
  const auto topology = cslearn::read_topology(topology_path);
  const auto a = cslearn::mixing_matrix(topology);
  fmt::print("nodes {}\nedges {}\ndelta {:.12g}\nbeta {:.12g}\n", topology.size(),
             topology.edges().size(), a.spectral_gap(), a.beta());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed distributed social learning experiments"};
  app.require_subcommand(1);
  Overrides o;
  fs::path config_path;
  fs::path topology_path;
  std::vector<fs::path> traces;
  fs::path svg;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "Experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Override run.seed");
    cmd->add_option("--rounds", o.rounds, "Override run.rounds")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out-dir", o.out_dir, "Directory for output files");
    cmd->add_flag("--diagnostics", o.diagnostics,
                  "Pair the run with the uncompressed reference and write diagnostics");
  };
  auto* run_cmd = app.add_subcommand("run", "Single run, trace CSV");
  add_common(run_cmd);
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo over omega x (n or m)");
  add_common(sweep_cmd);
  auto* gamma_cmd = app.add_subcommand("gamma-search", "Stepsize grid search");
  add_common(gamma_cmd);
  auto* spectral_cmd = app.add_subcommand("spectral", "Print delta and beta of a topology");
  spectral_cmd->add_option("topology", topology_path, "Topology file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* plot_cmd = app.add_subcommand("plot", "Render trace CSVs to SVG");
  plot_cmd->add_option("traces", traces, "Trace CSV files")->required();
  plot_cmd->add_option("-o,--output", svg, "Output SVG")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run(config_path, o);
    if (sweep_cmd->parsed()) return sweep(config_path, o);
    if (gamma_cmd->parsed()) return gamma_search(config_path, o);
    if (spectral_cmd->parsed()) return spectral(topology_path);
    if (plot_cmd->parsed()) {
      cslearn::plot_traces(traces, svg);
      fmt::print("plot written to {}\n", svg.string());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
