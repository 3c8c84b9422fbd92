#include "cslearn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace cslearn {
namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-12;

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigendecomposition failed");
  }
  return solver.eigenvalues();  // ascending
}

std::vector<Edge> torus_edges(std::size_t rows, std::size_t cols) {
  std::vector<Edge> edges;
  auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      edges.push_back({id(r, c), id(r, (c + 1) % cols)});
      edges.push_back({id(r, c), id((r + 1) % rows, c)});
    }
  }
  return edges;
}

std::size_t torus_rows_for(std::size_t n) {
  std::size_t rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (rows >= 2 && n % rows != 0) --rows;
  return rows;
}

}  // namespace

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Path:
      return "path";
    case TopologyKind::Ring:
      return "ring";
    case TopologyKind::Torus:
      return "torus";
    case TopologyKind::ErdosRenyi:
      return "erdos_renyi";
    case TopologyKind::Complete:
      return "complete";
    case TopologyKind::Custom:
      return "custom";
  }
  return "unknown";
}

TopologyKind parse_topology_kind(const std::string& name) {
  for (auto kind : {TopologyKind::Path, TopologyKind::Ring, TopologyKind::Torus,
                    TopologyKind::ErdosRenyi, TopologyKind::Complete,
                    TopologyKind::Custom}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument(
      "unknown topology '" + name +
      "' (expected path, ring, torus, erdos_renyi, complete)");
}

bool is_connected(std::size_t n, const std::vector<Edge>& edges) {
  if (n == 0) return false;
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (const auto& e : edges) {
    adjacency[e.u].push_back(e.v);
    adjacency[e.v].push_back(e.u);
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto i = frontier.front();
    frontier.pop();
    for (auto j : adjacency[i]) {
      if (!seen[j]) {
        seen[j] = true;
        ++reached;
        frontier.push(j);
      }
    }
  }
  return reached == n;
}

Topology::Topology(std::size_t n, std::vector<Edge> edges, TopologyKind kind)
    : n_(n), kind_(kind) {
  if (n == 0) throw std::invalid_argument("topology needs at least one agent");
  for (auto& e : edges) {
    if (e.u == e.v) {
      throw std::invalid_argument("self-loop at agent " + std::to_string(e.u));
    }
    if (e.u >= n || e.v >= n) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  if (!is_connected(n, edges)) {
    throw std::invalid_argument("communication graph is not connected");
  }
  edges_ = std::move(edges);
  adjacency_.resize(n);
  for (const auto& e : edges_) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

double er_sparse_probability(std::size_t n) {
  const double nd = static_cast<double>(n);
  return std::min(1.0, 2.0 * std::log(nd) / nd);
}

double er_dense_probability(std::size_t n) {
  return std::min(1.0, 1.0 / std::sqrt(static_cast<double>(n)));
}

Topology build_graph(TopologyKind kind, std::size_t n,
                     const TopologyParams& params, Rng& rng) {
  if (n < 2) throw std::invalid_argument("build_graph needs n >= 2");
  std::vector<Edge> edges;
  switch (kind) {
    case TopologyKind::Path:
      for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
      break;
    case TopologyKind::Ring:
      for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
      break;
    case TopologyKind::Complete:
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
      }
      break;
    case TopologyKind::Torus: {
      const std::size_t rows =
          params.torus_rows != 0 ? params.torus_rows : torus_rows_for(n);
      if (rows < 2 || n % rows != 0 || n / rows < 2) {
        throw std::invalid_argument("torus needs n = r * c with r, c >= 2; n=" +
                                    std::to_string(n));
      }
      edges = torus_edges(rows, n / rows);
      break;
    }
    case TopologyKind::ErdosRenyi: {
      const double p = params.er_probability;
      if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("ER probability must lie in (0, 1]");
      }
      std::bernoulli_distribution coin(p);
      for (std::size_t attempt = 0; attempt < params.er_max_attempts;
           ++attempt) {
        edges.clear();
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = i + 1; j < n; ++j) {
            if (coin(rng)) edges.push_back({i, j});
          }
        }
        if (is_connected(n, edges)) return Topology(n, std::move(edges), kind);
      }
      throw std::runtime_error(
          "no connected Erdos-Renyi realization after " +
          std::to_string(params.er_max_attempts) +
          " attempts; edge probability too low for n=" + std::to_string(n));
    }
    case TopologyKind::Custom:
      throw std::invalid_argument("custom topologies are loaded from a file");
  }
  return Topology(n, std::move(edges), kind);
}

double spectral_gap(const Eigen::MatrixXd& a) {
  if (a.rows() == 1) return 1.0;
  const Eigen::VectorXd ev = symmetric_eigenvalues(a);
  const Eigen::Index n = ev.size();
  // Largest eigenvalue is 1 for a doubly stochastic matrix; the second
  // largest modulus comes from either end of the remaining spectrum.
  const double lambda2 = std::max(std::abs(ev(n - 2)), std::abs(ev(0)));
  if (lambda2 >= 1.0 - 1e-12) {
    throw std::domain_error(
        "|lambda_2| is 1: mixing matrix is disconnected or not contractive");
  }
  return 1.0 - lambda2;
}

double beta_norm(const Eigen::MatrixXd& a) {
  const Eigen::VectorXd ev = symmetric_eigenvalues(a);
  return (Eigen::VectorXd::Ones(ev.size()) - ev).cwiseAbs().maxCoeff();
}

MixingMatrix::MixingMatrix(Eigen::MatrixXd weights)
    : weights_(std::move(weights)) {
  const Eigen::Index n = weights_.rows();
  if (n == 0 || weights_.cols() != n) {
    throw std::invalid_argument("mixing matrix must be square and nonempty");
  }
  if ((weights_ - weights_.transpose()).cwiseAbs().maxCoeff() >
      kSymmetryTolerance) {
    throw std::invalid_argument("mixing matrix is not symmetric");
  }
  if (weights_.minCoeff() < 0.0) {
    throw std::invalid_argument("mixing matrix has a negative entry");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(weights_.row(i).sum() - 1.0) > kRowSumTolerance) {
      throw std::invalid_argument("mixing matrix row " + std::to_string(i) +
                                  " does not sum to 1");
    }
    if (!(weights_(i, i) > 0.0)) {
      throw std::invalid_argument("mixing matrix diagonal must be positive");
    }
  }
  delta_ = cslearn::spectral_gap(weights_);
  beta_ = beta_norm(weights_);
}

MixingMatrix mixing_matrix(const Topology& topology) {
  const auto n = static_cast<Eigen::Index>(topology.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : topology.edges()) {
    const double w =
        1.0 / static_cast<double>(
                  std::max(topology.degree(e.u), topology.degree(e.v)) + 1);
    a(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = w;
    a(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = w;
  }
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) = 1.0 - a.row(i).sum();
  return MixingMatrix(std::move(a));
}

MixingMatrix damped(const MixingMatrix& a, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("stepsize gamma must lie in (0, 1]");
  }
  const auto n = static_cast<Eigen::Index>(a.size());
  return MixingMatrix((1.0 - gamma) * Eigen::MatrixXd::Identity(n, n) +
                      gamma * a.weights());
}

void write_topology(std::ostream& out, const Topology& topology) {
  out << "# cslearn topology (" << to_string(topology.kind()) << ")\n";
  out << "# nodes " << topology.size() << "\n";
  for (const auto& e : topology.edges()) out << e.u << ' ' << e.v << '\n';
}

void write_topology(const std::filesystem::path& path,
                    const Topology& topology) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_topology(out, topology);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Topology read_topology(std::istream& in) {
  std::vector<Edge> edges;
  std::size_t declared = 0;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      std::istringstream comment(line.substr(hash + 1));
      std::string word;
      if (comment >> word && word == "nodes") comment >> declared;
      line.erase(hash);
    }
    std::istringstream fields(line);
    long long u = 0;
    long long v = 0;
    if (!(fields >> u)) continue;  // blank line
    std::string rest;
    if (!(fields >> v) || (fields >> rest) || u < 0 || v < 0) {
      throw std::invalid_argument("malformed edge on line " +
                                  std::to_string(line_no));
    }
    edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
    max_index = std::max({max_index, edges.back().u, edges.back().v});
  }
  if (edges.empty() && declared <= 1) {
    if (declared == 1) return Topology(1, {});
    throw std::invalid_argument("topology file has no edges");
  }
  const std::size_t n = declared != 0 ? declared : max_index + 1;
  return Topology(n, std::move(edges), TopologyKind::Custom);
}

Topology read_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_topology(in);
}

}  // namespace cslearn
