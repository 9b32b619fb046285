#pragma once

// Experiment configuration: one structured text file (key = value grouped in
// [sections]), strict about unknown keys, overridable through dotted paths.
// The resolved config is embedded in every output file for provenance.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "recmet/engine.hpp"
#include "recmet/models.hpp"

namespace recmet {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace cfgdetail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& v, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError(path + ": expected a number, got '" + v + "'");
  }
}

inline std::int64_t to_int(const std::string& v, const std::string& path) {
  try {
    std::size_t pos = 0;
    const std::int64_t x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError(path + ": expected an integer, got '" + v + "'");
  }
}

inline std::uint64_t to_uint(const std::string& v, const std::string& path) {
  const auto x = to_int(v, path);
  if (x < 0) throw ConfigError(path + ": must be non-negative");
  return static_cast<std::uint64_t>(x);
}

inline bool to_bool(const std::string& v, const std::string& path) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(path + ": expected true/false");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& v, const std::string& path, F conv) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(conv(item, path));
  }
  return out;
}

}  // namespace cfgdetail

struct ModelConfig {
  std::string kind = "finite_demo";
  double beta = 1.5;
  double eps_tail = 1e-3;
  std::uint32_t max_children = 20000;
  // explicit tables
  std::vector<VertexId> parents;
  std::vector<double> r, s, L;
  double alpha = 0.5;
};

struct EngineConfig {
  int depth = 12;
  double resolution_floor = 0.0;
  std::uint64_t max_nodes = 4000000;
  int height_depth = 16;
};

struct ExperimentBlock {
  std::uint32_t k = 2;
  int reps = 200;
  std::uint64_t n = 10000;  // draws for the hypothesis estimators
  std::size_t n_points = 1000;
  std::size_t n_centers = 32;
  std::size_t n_mass_points = 1000;
  std::vector<int> depths;
  std::vector<double> eps_grid;
  std::vector<double> radii_grid;
  std::vector<double> p_list = {1.0};
  double delta = 0.1;
  double epsilon = 0.5;
  int height_samples = 8;
  int permutations = 200;
  bool coupled = true;
};

struct OutputConfig {
  std::string path = "out.json";
  std::string format = "json";
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  ModelConfig model;
  EngineConfig engine;
  ExperimentBlock experiment;
  OutputConfig output;

  static ExperimentConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
  }

  static ExperimentConfig parse_string(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = cfgdetail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
        section = cfgdetail::trim(line.substr(1, line.size() - 2));
        if (section != "model" && section != "engine" &&
            section != "experiment" && section != "output")
          throw ConfigError("unknown section [" + section + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = cfgdetail::trim(line.substr(0, eq));
      const std::string value = cfgdetail::trim(line.substr(eq + 1));
      cfg.set(section.empty() ? key : section + "." + key, value);
    }
    return cfg;
  }

  // Dotted-path override (also the parser's single entry point), rejecting
  // unknown keys with the offending path.
  void set(const std::string& path, const std::string& value) {
    using namespace cfgdetail;
    if (path == "seed") {
      seed = to_uint(value, path);
    } else if (path == "model.kind") {
      if (value != "looptree" && value != "stable_tree" &&
          value != "brownian_crt" && value != "finite_demo" && value != "explicit")
        throw ConfigError("model.kind: unknown model '" + value + "'");
      model.kind = value;
    } else if (path == "model.beta") {
      model.beta = to_double(value, path);
    } else if (path == "model.eps_tail") {
      model.eps_tail = to_double(value, path);
    } else if (path == "model.max_children") {
      model.max_children = static_cast<std::uint32_t>(to_uint(value, path));
    } else if (path == "model.parents") {
      model.parents = to_list<VertexId>(value, path, to_int);
    } else if (path == "model.r") {
      model.r = to_list<double>(value, path, to_double);
    } else if (path == "model.s") {
      model.s = to_list<double>(value, path, to_double);
    } else if (path == "model.L") {
      model.L.clear();
      std::stringstream rows(value);
      std::string row;
      while (std::getline(rows, row, ';')) {
        const auto vals = to_list<double>(row, path, to_double);
        model.L.insert(model.L.end(), vals.begin(), vals.end());
      }
    } else if (path == "model.alpha") {
      model.alpha = to_double(value, path);
    } else if (path == "engine.depth") {
      engine.depth = static_cast<int>(to_int(value, path));
    } else if (path == "engine.resolution_floor") {
      engine.resolution_floor = to_double(value, path);
    } else if (path == "engine.max_nodes") {
      engine.max_nodes = to_uint(value, path);
    } else if (path == "engine.height_depth") {
      engine.height_depth = static_cast<int>(to_int(value, path));
    } else if (path == "experiment.k") {
      experiment.k = static_cast<std::uint32_t>(to_uint(value, path));
    } else if (path == "experiment.reps") {
      experiment.reps = static_cast<int>(to_int(value, path));
    } else if (path == "experiment.n") {
      experiment.n = to_uint(value, path);
    } else if (path == "experiment.n_points") {
      experiment.n_points = to_uint(value, path);
    } else if (path == "experiment.n_centers") {
      experiment.n_centers = to_uint(value, path);
    } else if (path == "experiment.n_mass_points") {
      experiment.n_mass_points = to_uint(value, path);
    } else if (path == "experiment.depths") {
      experiment.depths.clear();
      for (const auto d : to_list<std::int64_t>(value, path, to_int))
        experiment.depths.push_back(static_cast<int>(d));
    } else if (path == "experiment.eps_grid") {
      experiment.eps_grid = to_list<double>(value, path, to_double);
    } else if (path == "experiment.radii_grid") {
      experiment.radii_grid = to_list<double>(value, path, to_double);
    } else if (path == "experiment.p_list") {
      experiment.p_list = to_list<double>(value, path, to_double);
    } else if (path == "experiment.delta") {
      experiment.delta = to_double(value, path);
    } else if (path == "experiment.epsilon") {
      experiment.epsilon = to_double(value, path);
    } else if (path == "experiment.height_samples") {
      experiment.height_samples = static_cast<int>(to_int(value, path));
    } else if (path == "experiment.permutations") {
      experiment.permutations = static_cast<int>(to_int(value, path));
    } else if (path == "experiment.coupled") {
      experiment.coupled = to_bool(value, path);
    } else if (path == "output.path") {
      output.path = value;
    } else if (path == "output.format") {
      if (value != "json" && value != "csv")
        throw ConfigError("output.format: must be json or csv");
      output.format = value;
    } else {
      throw ConfigError("unknown config key: " + path);
    }
  }

  BranchLaw make_law() const {
    TruncationPolicy pol;
    if (!(model.eps_tail > 0.0) || !(model.eps_tail < 1.0))
      throw ConfigError("model.eps_tail: must be in (0,1)");
    if (model.max_children < 1)
      throw ConfigError("model.max_children: must be >= 1");
    pol.eps_tail = model.eps_tail;
    pol.max_children = model.max_children;
    try {
      if (model.kind == "looptree") return BranchLaw::looptree(model.beta, pol);
      if (model.kind == "stable_tree") return BranchLaw::stable_tree(model.beta, pol);
      if (model.kind == "brownian_crt") return BranchLaw::brownian_crt(pol);
      if (model.kind == "finite_demo") return BranchLaw::finite_demo();
      return BranchLaw::explicit_law(model.parents, model.r, model.s, model.L,
                                     model.alpha);
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
  }

  EngineOptions engine_options() const {
    if (engine.depth < 0) throw ConfigError("engine.depth: must be >= 0");
    if (engine.resolution_floor < 0.0)
      throw ConfigError("engine.resolution_floor: must be >= 0");
    EngineOptions opt;
    opt.max_depth = std::max(engine.depth, engine.height_depth);
    opt.resolution_floor = engine.resolution_floor;
    opt.max_nodes = engine.max_nodes;
    opt.height_depth = engine.height_depth;
    return opt;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["model"] = {{"kind", model.kind},
                  {"beta", model.beta},
                  {"eps_tail", model.eps_tail},
                  {"max_children", model.max_children},
                  {"alpha", model.alpha}};
    if (!model.parents.empty()) {
      j["model"]["parents"] = model.parents;
      j["model"]["r"] = model.r;
      j["model"]["s"] = model.s;
      j["model"]["L"] = model.L;
    }
    j["engine"] = {{"depth", engine.depth},
                   {"resolution_floor", engine.resolution_floor},
                   {"max_nodes", engine.max_nodes},
                   {"height_depth", engine.height_depth}};
    j["experiment"] = {{"k", experiment.k},
                       {"reps", experiment.reps},
                       {"n", experiment.n},
                       {"n_points", experiment.n_points},
                       {"n_centers", experiment.n_centers},
                       {"n_mass_points", experiment.n_mass_points},
                       {"depths", experiment.depths},
                       {"eps_grid", experiment.eps_grid},
                       {"radii_grid", experiment.radii_grid},
                       {"p_list", experiment.p_list},
                       {"delta", experiment.delta},
                       {"epsilon", experiment.epsilon},
                       {"height_samples", experiment.height_samples},
                       {"permutations", experiment.permutations},
                       {"coupled", experiment.coupled}};
    j["output"] = {{"path", output.path}, {"format", output.format}};
    return j;
  }
};

}  // namespace recmet
