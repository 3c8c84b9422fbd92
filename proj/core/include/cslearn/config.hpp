#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cslearn/compression.hpp"
#include "cslearn/graph.hpp"
#include "cslearn/learner.hpp"

namespace cslearn {

enum class GammaPolicy { Theoretical, Fixed, GridSearch };

// FixedSequence replays one observation path (run 0) in every repeat;
// Resampled draws a fresh path per repeat or Monte Carlo run.
enum class SignalMode { FixedSequence, Resampled };

enum class WorldMode { Fixed, Resampled };

enum class SweepAxis { Agents, Hypotheses };

/// Everything one experiment needs. Loaded from an INI-style file:
///
///   [network]      topology, agents, er_probability, torus_rows, file
///   [world]        hypotheses, alphabet_size, alpha2, min_gap, file
///   [compression]  kind, k, bits, scalar_bits
///   [learning]     gamma (theoretical | grid | number), grid, mode
///   [run]          rounds, seed, repeats, runs, signals, world, epsilon,
///                  belief_epsilon, stop_at_epsilon, rho, threads
///   [sweep]        omegas, axis (n | m), values
struct ExperimentConfig {
  TopologyKind topology = TopologyKind::Torus;
  std::size_t agents = 100;
  TopologyParams topology_params;
  std::optional<std::filesystem::path> topology_file;

  std::size_t hypotheses = 400;
  std::size_t alphabet_size = 20;
  double alpha2 = 1e-3;
  double min_gap = 1e-3;
  std::optional<std::filesystem::path> world_file;

  CompressionSpec compression = CompressionSpec::full();

  GammaPolicy gamma_policy = GammaPolicy::Theoretical;
  double gamma = 0.0;
  // Explicit grid; empty means {omega/4, omega/2, omega, 2 omega, 4 omega}.
  std::vector<double> gamma_grid;
  LearnerMode mode = LearnerMode::Standard;

  std::size_t rounds = 2000;
  std::uint64_t seed = 1;
  // Repeats of a randomized operator on one observation path.
  std::size_t repeats = 10;
  // Monte Carlo runs.
  std::size_t runs = 100;
  SignalMode signals = SignalMode::FixedSequence;
  WorldMode world = WorldMode::Fixed;
  double epsilon = 1e-5;
  double belief_epsilon = 1e-8;
  bool stop_at_epsilon = false;
  double rho = 0.05;
  // Monte Carlo workers; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  std::vector<double> sweep_omegas{0.01, 0.05, 0.1, 0.5, 1.0};
  SweepAxis sweep_axis = SweepAxis::Agents;
  std::vector<std::size_t> sweep_values;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

[[nodiscard]] ExperimentConfig parse_config(std::istream& in);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

[[nodiscard]] std::string to_string(GammaPolicy policy);
[[nodiscard]] std::string to_string(SignalMode mode);
[[nodiscard]] std::string to_string(LearnerMode mode);

}  // namespace cslearn
