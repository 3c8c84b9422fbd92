#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cslearn/rng.hpp"

namespace cslearn {

enum class TopologyKind { Path, Ring, Torus, ErdosRenyi, Complete, Custom };

[[nodiscard]] std::string to_string(TopologyKind kind);
[[nodiscard]] TopologyKind parse_topology_kind(const std::string& name);

/// Undirected edge with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Fixed, undirected, connected communication graph over agents 0..n-1.
class Topology {
 public:
  /// Normalizes each edge to u < v and removes duplicates. Throws
  /// std::invalid_argument on self-loops, out-of-range endpoints or a
  /// disconnected graph.
  Topology(std::size_t n, std::vector<Edge> edges,
           TopologyKind kind = TopologyKind::Custom);

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] TopologyKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept {
    return edges_;
  }
  [[nodiscard]] const std::vector<std::size_t>& neighbors(std::size_t i) const {
    return adjacency_.at(i);
  }
  [[nodiscard]] std::size_t degree(std::size_t i) const {
    return adjacency_.at(i).size();
  }

 private:
  std::size_t n_;
  TopologyKind kind_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

[[nodiscard]] bool is_connected(std::size_t n, const std::vector<Edge>& edges);

struct TopologyParams {
  // ErdosRenyi edge probability in (0, 1].
  double er_probability = 0.0;
  // Torus row count; 0 picks the largest divisor of n not above sqrt(n).
  std::size_t torus_rows = 0;
  // Connected-realization resampling cap for ErdosRenyi.
  std::size_t er_max_attempts = 1000;
};

/// ER edge probability of order log(n)/n: 2 ln(n) / n, capped at 1.
[[nodiscard]] double er_sparse_probability(std::size_t n);
/// ER edge probability of order 1/sqrt(n), capped at 1.
[[nodiscard]] double er_dense_probability(std::size_t n);

[[nodiscard]] Topology build_graph(TopologyKind kind, std::size_t n,
                                   const TopologyParams& params, Rng& rng);

/// Symmetric doubly stochastic weight matrix with cached spectral data.
class MixingMatrix {
 public:
  /// Validates symmetry, unit row sums (1e-12), nonnegativity and a
  /// positive diagonal; computes delta and beta.
  explicit MixingMatrix(Eigen::MatrixXd weights);

  [[nodiscard]] const Eigen::MatrixXd& weights() const noexcept {
    return weights_;
  }
  [[nodiscard]] std::size_t size() const noexcept {
    return static_cast<std::size_t>(weights_.rows());
  }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
    return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  [[nodiscard]] double spectral_gap() const noexcept { return delta_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }

 private:
  Eigen::MatrixXd weights_;
  double delta_;
  double beta_;
};

/// A_ij = 1 / max(d_i + 1, d_j + 1) on edges, A_ii = 1 - sum_{j != i} A_ij.
[[nodiscard]] MixingMatrix mixing_matrix(const Topology& topology);

/// B = (1 - gamma) I + gamma A.
[[nodiscard]] MixingMatrix damped(const MixingMatrix& a, double gamma);

/// 1 - |lambda_2(A)| via dense symmetric eigendecomposition. A 1x1 matrix
/// has gap 1. Throws std::domain_error when |lambda_2| >= 1 - 1e-12.
[[nodiscard]] double spectral_gap(const Eigen::MatrixXd& a);

/// ||I - A||_2 = max_i |1 - lambda_i(A)| for symmetric A.
[[nodiscard]] double beta_norm(const Eigen::MatrixXd& a);

// Adjacency list file: one "i j" edge per line (0-based); '#' starts a
// comment; an optional "# nodes N" header fixes the agent count.
void write_topology(std::ostream& out, const Topology& topology);
void write_topology(const std::filesystem::path& path,
                    const Topology& topology);
[[nodiscard]] Topology read_topology(std::istream& in);
[[nodiscard]] Topology read_topology(const std::filesystem::path& path);

}  // namespace cslearn
