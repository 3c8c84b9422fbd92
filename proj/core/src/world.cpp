#include "cslearn/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace cslearn {
namespace {

constexpr double kStochasticTolerance = 1e-12;
constexpr double kOptimalTolerance = 1e-12;
constexpr const char* kWorldFormat = "cslearn-world";
constexpr int kWorldVersion = 1;

void check_distribution(const Eigen::Ref<const Eigen::VectorXd>& p,
                        const std::string& what) {
  if (p.size() == 0) throw std::invalid_argument(what + " is empty");
  if (!p.allFinite() || p.minCoeff() < 0.0) {
    throw std::invalid_argument(what + " has a negative or nonfinite entry");
  }
  if (std::abs(p.sum() - 1.0) > kStochasticTolerance) {
    throw std::invalid_argument(what + " does not sum to 1");
  }
}

Eigen::VectorXd dirichlet(std::size_t size, double concentration, Rng& rng) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  Eigen::VectorXd draw(static_cast<Eigen::Index>(size));
  double total = 0.0;
  do {
    for (auto& v : draw) v = gamma(rng);
    total = draw.sum();
  } while (!(total > 0.0));
  return draw / total;
}

}  // namespace

void WorldModel::validate() const {
  const std::size_t n = agents();
  if (n == 0) throw std::invalid_argument("world has no agents");
  if (likelihoods.size() != n) {
    throw std::invalid_argument("world needs one likelihood table per agent");
  }
  if (!(alpha2 > 0.0 && alpha2 < 1.0)) {
    throw std::invalid_argument("alpha2 must lie in (0, 1)");
  }
  const auto m = likelihoods[0].rows();
  if (m == 0) throw std::invalid_argument("world has no hypotheses");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string agent = "agent " + std::to_string(i);
    check_distribution(truths[i], agent + " truth");
    const auto& table = likelihoods[i];
    if (table.rows() != m || table.cols() != truths[i].size()) {
      throw std::invalid_argument(agent + " likelihood table has wrong shape");
    }
    for (Eigen::Index theta = 0; theta < m; ++theta) {
      check_distribution(table.row(theta).transpose(),
                         agent + " likelihood row " + std::to_string(theta));
    }
  }
  if (min_supported_likelihood() < alpha2) {
    throw std::invalid_argument(
        "likelihood floor violated: some l_i(s|theta) < alpha2 on the support "
        "of f_i");
  }
}

double WorldModel::min_supported_likelihood() const {
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < agents(); ++i) {
    for (Eigen::Index s = 0; s < truths[i].size(); ++s) {
      if (truths[i](s) > 0.0) {
        lowest = std::min(lowest, likelihoods[i].col(s).minCoeff());
      }
    }
  }
  return lowest;
}

bool ObjectiveProfile::is_optimal(std::size_t theta) const {
  return std::find(optimal_set.begin(), optimal_set.end(), theta) !=
         optimal_set.end();
}

double kl(std::span<const double> f, std::span<const double> l) {
  if (f.size() != l.size()) {
    throw std::invalid_argument("kl: distributions differ in length");
  }
  double sum = 0.0;
  for (std::size_t s = 0; s < f.size(); ++s) {
    if (f[s] == 0.0) continue;
    if (!(l[s] > 0.0)) {
      throw std::domain_error("kl: l(s) = 0 where f(s) > 0 (support violation)");
    }
    sum += f[s] * std::log(f[s] / l[s]);
  }
  return std::max(sum, 0.0);
}

ObjectiveProfile objective(const WorldModel& world) {
  const std::size_t n = world.agents();
  const std::size_t m = world.hypotheses();
  ObjectiveProfile profile;
  profile.values.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = world.truths[i];
    Eigen::VectorXd row;
    for (std::size_t theta = 0; theta < m; ++theta) {
      row = world.likelihoods[i].row(static_cast<Eigen::Index>(theta));
      profile.values[theta] +=
          kl({f.data(), static_cast<std::size_t>(f.size())},
             {row.data(), static_cast<std::size_t>(row.size())});
    }
  }
  for (auto& v : profile.values) v /= static_cast<double>(n);

  profile.optimum = *std::min_element(profile.values.begin(), profile.values.end());
  double second = std::numeric_limits<double>::infinity();
  for (std::size_t theta = 0; theta < m; ++theta) {
    if (profile.values[theta] - profile.optimum <= kOptimalTolerance) {
      profile.optimal_set.push_back(theta);
    } else {
      second = std::min(second, profile.values[theta]);
    }
  }
  profile.gap = std::isfinite(second) ? second - profile.optimum : 0.0;
  return profile;
}

WorldModel random_world(const RandomWorldParams& params, Rng& rng) {
  if (params.agents < 1 || params.hypotheses < 1) {
    throw std::invalid_argument("random_world needs n >= 1 and m >= 1");
  }
  if (params.alphabet_size < 2) {
    throw std::invalid_argument("random_world needs alphabet_size >= 2");
  }
  const double floor_mass =
      params.alpha2 * static_cast<double>(params.alphabet_size);
  if (!(params.alpha2 > 0.0) || floor_mass >= 1.0) {
    throw std::invalid_argument(
        "alpha2 must be positive with alpha2 * alphabet_size < 1");
  }
  if (!(params.concentration > 0.0)) {
    throw std::invalid_argument("Dirichlet concentration must be positive");
  }

  const auto m = static_cast<Eigen::Index>(params.hypotheses);
  const auto s = static_cast<Eigen::Index>(params.alphabet_size);
  for (std::size_t attempt = 0; attempt < params.max_attempts; ++attempt) {
    WorldModel world;
    world.alpha2 = params.alpha2;
    for (std::size_t i = 0; i < params.agents; ++i) {
      Eigen::MatrixXd table(m, s);
      for (Eigen::Index theta = 0; theta < m; ++theta) {
        table.row(theta) =
            (params.alpha2 +
             (1.0 - floor_mass) *
                 dirichlet(params.alphabet_size, params.concentration, rng)
                     .array())
                .matrix()
                .transpose();
      }
      world.likelihoods.push_back(std::move(table));
      world.truths.push_back(
          dirichlet(params.alphabet_size, params.concentration, rng));
    }
    if (!params.require_unique_optimum) return world;
    const auto profile = objective(world);
    if (profile.optimal_set.size() == 1 &&
        (params.hypotheses == 1 || profile.gap >= params.min_gap)) {
      return world;
    }
  }
  throw std::runtime_error("random_world: no world with a unique optimum and gap >= " +
                           std::to_string(params.min_gap) + " after " +
                           std::to_string(params.max_attempts) + " attempts");
}

std::size_t sample_signal(const WorldModel& world, std::size_t agent,
                          Rng& rng) {
  const auto& f = world.truths.at(agent);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cumulative = 0.0;
  Eigen::Index last_supported = 0;
  for (Eigen::Index s = 0; s < f.size(); ++s) {
    if (f(s) <= 0.0) continue;
    last_supported = s;
    cumulative += f(s);
    if (u < cumulative) return static_cast<std::size_t>(s);
  }
  return static_cast<std::size_t>(last_supported);
}

SignalTable::SignalTable(const WorldModel& world, std::size_t rounds,
                         StreamKey key)
    : rounds_(rounds), agents_(world.agents()), signals_(rounds * agents_) {
  for (std::size_t i = 0; i < agents_; ++i) {
    auto rng = key.stream(0, i, StreamPurpose::Signals);
    for (std::size_t t = 0; t < rounds_; ++t) {
      signals_[t * agents_ + i] = sample_signal(world, i, rng);
    }
  }
}

std::span<const std::size_t> SignalTable::at(std::size_t t) const {
  if (t >= rounds_) throw std::out_of_range("signal table exhausted");
  return {signals_.data() + t * agents_, agents_};
}

void save_world(std::ostream& out, const WorldModel& world) {
  world.validate();
  nlohmann::json doc;
  doc["format"] = kWorldFormat;
  doc["version"] = kWorldVersion;
  doc["agents"] = world.agents();
  doc["hypotheses"] = world.hypotheses();
  doc["alpha2"] = world.alpha2;
  auto& agents = doc["agent_models"] = nlohmann::json::array();
  for (std::size_t i = 0; i < world.agents(); ++i) {
    nlohmann::json agent;
    agent["truth"] = std::vector<double>(world.truths[i].begin(),
                                         world.truths[i].end());
    auto& rows = agent["likelihoods"] = nlohmann::json::array();
    const auto& table = world.likelihoods[i];
    for (Eigen::Index theta = 0; theta < table.rows(); ++theta) {
      std::vector<double> row(static_cast<std::size_t>(table.cols()));
      for (Eigen::Index s = 0; s < table.cols(); ++s) {
        row[static_cast<std::size_t>(s)] = table(theta, s);
      }
      rows.push_back(std::move(row));
    }
    agents.push_back(std::move(agent));
  }
  out << doc.dump(1) << '\n';
}

void save_world(const std::filesystem::path& path, const WorldModel& world) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_world(out, world);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

WorldModel load_world(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("world file is not valid JSON: ") +
                                e.what());
  }
  if (doc.value("format", std::string{}) != kWorldFormat) {
    throw std::invalid_argument("not a cslearn world file");
  }
  if (doc.value("version", 0) != kWorldVersion) {
    throw std::invalid_argument("unsupported world file version");
  }
  WorldModel world;
  try {
    world.alpha2 = doc.at("alpha2").get<double>();
    for (const auto& agent : doc.at("agent_models")) {
      const auto truth = agent.at("truth").get<std::vector<double>>();
      world.truths.emplace_back(Eigen::Map<const Eigen::VectorXd>(
          truth.data(), static_cast<Eigen::Index>(truth.size())));
      const auto rows =
          agent.at("likelihoods").get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(truth.size()));
      for (std::size_t theta = 0; theta < rows.size(); ++theta) {
        if (rows[theta].size() != truth.size()) {
          throw std::invalid_argument("likelihood row length mismatch");
        }
        for (std::size_t s = 0; s < truth.size(); ++s) {
          table(static_cast<Eigen::Index>(theta), static_cast<Eigen::Index>(s)) =
              rows[theta][s];
        }
      }
      world.likelihoods.push_back(std::move(table));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed world file: ") + e.what());
  }
  if (world.agents() != doc.value("agents", world.agents()) ||
      world.hypotheses() != doc.value("hypotheses", world.hypotheses())) {
    throw std::invalid_argument("world file header disagrees with its tables");
  }
  world.validate();
  return world;
}

WorldModel load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_world(in);
}

}  // namespace cslearn
