#include "cslearn/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cslearn {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"network", {"topology", "agents", "er_probability", "torus_rows", "file"}},
      {"world", {"hypotheses", "alphabet_size", "alpha2", "min_gap", "file"}},
      {"compression", {"kind", "k", "bits", "scalar_bits"}},
      {"learning", {"gamma", "grid", "mode"}},
      {"run",
       {"rounds", "seed", "repeats", "runs", "signals", "world", "epsilon",
        "belief_epsilon", "stop_at_epsilon", "rho", "threads"}},
      {"sweep", {"omegas", "axis", "values"}},
  };
  return keys;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// The INI parser keeps trailing comments and quotes in values.
std::string clean(std::string value) {
  const auto hash = value.find('#');
  if (hash != std::string::npos) value.erase(hash);
  value = trim(value);
  if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
      value.back() == value.front()) {
    value = value.substr(1, value.size() - 2);
  }
  return value;
}

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw std::invalid_argument(field + ": " + what);
}

std::uint64_t to_unsigned(const std::string& field, const std::string& text) {
  std::uint64_t out = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    bad(field, "expected a nonnegative integer, got '" + text + "'");
  }
  return out;
}

double to_real(const std::string& field, const std::string& text) {
  std::istringstream in(text);
  double out = 0.0;
  in >> out;
  if (text.empty() || !in || !(in >> std::ws).eof() || !std::isfinite(out)) {
    bad(field, "expected a finite number, got '" + text + "'");
  }
  return out;
}

bool to_bool(const std::string& field, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  bad(field, "expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
      const auto known = schema().find(section);
      if (known == schema().end()) bad(section, "unknown section");
      if (!body.data().empty()) bad(section, "key outside of a section");
      for (const auto& [key, leaf] : body) {
        if (!known->second.contains(key)) bad(section + "." + key, "unknown key");
        values_[section + "." + key] = clean(leaf.data());
      }
    }
  }

  [[nodiscard]] const std::string* find(const std::string& field) const {
    const auto it = values_.find(field);
    return it == values_.end() ? nullptr : &it->second;
  }

  template <typename Fn>
  void with(const std::string& field, Fn&& fn) const {
    if (const auto* text = find(field)) {
      try {
        fn(*text);
      } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        if (what.rfind(field + ":", 0) == 0) throw;
        bad(field, what);
      }
    }
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace

std::string to_string(GammaPolicy policy) {
  switch (policy) {
    case GammaPolicy::Theoretical: return "theoretical";
    case GammaPolicy::Fixed: return "fixed";
    case GammaPolicy::GridSearch: return "grid";
  }
  return "unknown";
}

std::string to_string(SignalMode mode) {
  return mode == SignalMode::FixedSequence ? "fixed" : "resampled";
}

std::string to_string(LearnerMode mode) {
  return mode == LearnerMode::Standard ? "standard" : "memory_efficient";
}

void ExperimentConfig::validate() const {
  if (!topology_file && agents < 2) bad("network.agents", "must be >= 2");
  if (hypotheses < 1 && !world_file) bad("world.hypotheses", "must be >= 1");
  if (alphabet_size < 2 && !world_file) bad("world.alphabet_size", "must be >= 2");
  if (!(alpha2 > 0.0 && alpha2 * static_cast<double>(alphabet_size) < 1.0) &&
      !world_file) {
    bad("world.alpha2", "must be positive with alpha2 * alphabet_size < 1");
  }
  if (!(min_gap >= 0.0)) bad("world.min_gap", "must be nonnegative");
  if (topology_params.er_probability < 0.0 || topology_params.er_probability > 1.0) {
    bad("network.er_probability", "must lie in [0, 1] (0 picks 2 ln(n) / n)");
  }
  if (gamma_policy == GammaPolicy::Fixed && !(gamma > 0.0 && gamma <= 1.0)) {
    bad("learning.gamma", "must lie in (0, 1]");
  }
  for (double g : gamma_grid) {
    if (!(g > 0.0)) bad("learning.grid", "candidates must be positive");
  }
  if (rounds < 1) bad("run.rounds", "must be >= 1");
  if (repeats < 1) bad("run.repeats", "must be >= 1");
  if (runs < 1) bad("run.runs", "must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) bad("run.epsilon", "must lie in (0, 1)");
  if (!(belief_epsilon > 0.0 && belief_epsilon < 1.0)) {
    bad("run.belief_epsilon", "must lie in (0, 1)");
  }
  if (!(rho > 0.0 && rho < 1.0)) bad("run.rho", "must lie in (0, 1)");
  for (double w : sweep_omegas) {
    if (!(w > 0.0 && w <= 1.0)) bad("sweep.omegas", "entries must lie in (0, 1]");
  }
  if (compression.kind == CompressionKind::QsgdRandomized ||
      compression.kind == CompressionKind::QsgdDeterministic) {
    try {
      (void)compression.levels();
    } catch (const std::exception& e) {
      bad("compression.bits", e.what());
    }
  } else if (compression.kind != CompressionKind::Full && compression.k < 1) {
    bad("compression.k", "must be >= 1");
  }
  if (compression.scalar_bits < 1) bad("compression.scalar_bits", "must be >= 1");
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  const Reader r(tree);
  ExperimentConfig c;

  r.with("network.topology", [&](const std::string& v) {
    c.topology = parse_topology_kind(v);
  });
  r.with("network.agents", [&](const std::string& v) {
    c.agents = to_unsigned("network.agents", v);
  });
  r.with("network.er_probability", [&](const std::string& v) {
    c.topology_params.er_probability = to_real("network.er_probability", v);
  });
  r.with("network.torus_rows", [&](const std::string& v) {
    c.topology_params.torus_rows = to_unsigned("network.torus_rows", v);
  });
  r.with("network.file", [&](const std::string& v) {
    c.topology_file = v;
    c.topology = TopologyKind::Custom;
  });

  r.with("world.hypotheses", [&](const std::string& v) {
    c.hypotheses = to_unsigned("world.hypotheses", v);
  });
  r.with("world.alphabet_size", [&](const std::string& v) {
    c.alphabet_size = to_unsigned("world.alphabet_size", v);
  });
  r.with("world.alpha2", [&](const std::string& v) {
    c.alpha2 = to_real("world.alpha2", v);
  });
  r.with("world.min_gap", [&](const std::string& v) {
    c.min_gap = to_real("world.min_gap", v);
  });
  r.with("world.file", [&](const std::string& v) { c.world_file = v; });

  r.with("compression.kind", [&](const std::string& v) {
    c.compression.kind = parse_compression_kind(v);
  });
  r.with("compression.scalar_bits", [&](const std::string& v) {
    c.compression.scalar_bits = to_unsigned("compression.scalar_bits", v);
  });
  const bool qsgd = c.compression.kind == CompressionKind::QsgdRandomized ||
                    c.compression.kind == CompressionKind::QsgdDeterministic;
  if (qsgd) {
    c.compression.k = 2;
    r.with("compression.bits", [&](const std::string& v) {
      c.compression.k = to_unsigned("compression.bits", v);
    });
    if (r.find("compression.k")) bad("compression.k", "qsgd takes 'bits', not 'k'");
  } else {
    r.with("compression.k", [&](const std::string& v) {
      c.compression.k = to_unsigned("compression.k", v);
    });
    if (r.find("compression.bits")) {
      bad("compression.bits", "only the qsgd kinds take 'bits'");
    }
    if (c.compression.kind == CompressionKind::Full) c.compression.k = 0;
  }

  r.with("learning.gamma", [&](const std::string& v) {
    if (v == "theoretical") {
      c.gamma_policy = GammaPolicy::Theoretical;
    } else if (v == "grid") {
      c.gamma_policy = GammaPolicy::GridSearch;
    } else {
      c.gamma_policy = GammaPolicy::Fixed;
      c.gamma = to_real("learning.gamma", v);
    }
  });
  r.with("learning.grid", [&](const std::string& v) {
    for (const auto& item : split_list(v)) {
      c.gamma_grid.push_back(to_real("learning.grid", item));
    }
  });
  r.with("learning.mode", [&](const std::string& v) {
    if (v == "standard") {
      c.mode = LearnerMode::Standard;
    } else if (v == "memory_efficient") {
      c.mode = LearnerMode::MemoryEfficient;
    } else {
      bad("learning.mode", "expected standard or memory_efficient, got '" + v + "'");
    }
  });

  r.with("run.rounds", [&](const std::string& v) {
    c.rounds = to_unsigned("run.rounds", v);
  });
  r.with("run.seed", [&](const std::string& v) { c.seed = to_unsigned("run.seed", v); });
  r.with("run.repeats", [&](const std::string& v) {
    c.repeats = to_unsigned("run.repeats", v);
  });
  r.with("run.runs", [&](const std::string& v) { c.runs = to_unsigned("run.runs", v); });
  r.with("run.signals", [&](const std::string& v) {
    if (v == "fixed") {
      c.signals = SignalMode::FixedSequence;
    } else if (v == "resampled") {
      c.signals = SignalMode::Resampled;
    } else {
      bad("run.signals", "expected fixed or resampled, got '" + v + "'");
    }
  });
  r.with("run.world", [&](const std::string& v) {
    if (v == "fixed") {
      c.world = WorldMode::Fixed;
    } else if (v == "resampled") {
      c.world = WorldMode::Resampled;
    } else {
      bad("run.world", "expected fixed or resampled, got '" + v + "'");
    }
  });
  r.with("run.epsilon", [&](const std::string& v) {
    c.epsilon = to_real("run.epsilon", v);
  });
  r.with("run.belief_epsilon", [&](const std::string& v) {
    c.belief_epsilon = to_real("run.belief_epsilon", v);
  });
  r.with("run.stop_at_epsilon", [&](const std::string& v) {
    c.stop_at_epsilon = to_bool("run.stop_at_epsilon", v);
  });
  r.with("run.rho", [&](const std::string& v) { c.rho = to_real("run.rho", v); });
  r.with("run.threads", [&](const std::string& v) {
    c.threads = to_unsigned("run.threads", v);
  });

  r.with("sweep.omegas", [&](const std::string& v) {
    c.sweep_omegas.clear();
    for (const auto& item : split_list(v)) {
      c.sweep_omegas.push_back(to_real("sweep.omegas", item));
    }
  });
  r.with("sweep.axis", [&](const std::string& v) {
    if (v == "n") {
      c.sweep_axis = SweepAxis::Agents;
    } else if (v == "m") {
      c.sweep_axis = SweepAxis::Hypotheses;
    } else {
      bad("sweep.axis", "expected n or m, got '" + v + "'");
    }
  });
  r.with("sweep.values", [&](const std::string& v) {
    for (const auto& item : split_list(v)) {
      c.sweep_values.push_back(to_unsigned("sweep.values", item));
    }
  });

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  auto config = parse_config(in);
  // Relative data files are resolved against the config's directory.
  const auto base = path.parent_path();
  if (config.topology_file && config.topology_file->is_relative()) {
    config.topology_file = base / *config.topology_file;
  }
  if (config.world_file && config.world_file->is_relative()) {
    config.world_file = base / *config.world_file;
  }
  return config;
}

}  // namespace cslearn
