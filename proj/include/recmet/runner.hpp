#pragma once

// Subcommand implementations behind the CLI. Every command is a pure
// function of (config, seed): replicates fan out over a worker pool with
// per-replicate streams and are reduced in replicate-index order, so output
// bytes do not depend on scheduling.

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "recmet/analysis.hpp"
#include "recmet/config.hpp"
#include "recmet/engine.hpp"
#include "recmet/models.hpp"

namespace recmet {

template <typename Fn>
void parallel_for_index(std::size_t n, unsigned nthreads, Fn&& fn) {
  if (nthreads == 0) nthreads = 1;
  if (nthreads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned used = static_cast<unsigned>(
      std::min<std::size_t>(nthreads, n));
  pool.reserve(used);
  for (unsigned t = 0; t < used; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace rundetail {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << content;
}

inline std::string provenance_csv(const ExperimentConfig& cfg) {
  return "# config = " + cfg.to_json().dump() + "\n# seed = " +
         std::to_string(cfg.seed) + "\n";
}

inline nlohmann::json report_json(const HypothesisReport& r) {
  return {{"name", r.name},
          {"estimate", r.estimate},
          {"std_error", r.std_error},
          {"n_samples", r.n_samples},
          {"verdict", to_string(r.verdict)},
          {"note", r.note},
          {"censor_rate", r.censor_rate}};
}

inline std::string word_string(const std::vector<std::uint32_t>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(w[i]);
  }
  return s;
}

}  // namespace rundetail

// H1, H2_p / its L moment and H3_p for each p in p_list, the necessary
// condition, and the R_* negative moment. Exit 0 only if every verdict holds.
inline int cmd_check_hypotheses(const ExperimentConfig& cfg,
                                std::ostream& log = std::cerr) {
  const BranchLaw law = cfg.make_law();
  const std::uint64_t n = cfg.experiment.n;
  std::vector<HypothesisReport> reports;
  {
    RngStream rng(cfg.seed, 0x4831ull);
    reports.push_back(estimate_h1(law, std::max<std::uint64_t>(n / 10, 100), rng));
  }
  for (const double p : cfg.experiment.p_list) {
    RngStream rng(cfg.seed, hash_combine(0x4832ull, static_cast<std::uint64_t>(p * 1024)));
    const ContractionReport c = estimate_contraction(law, p, n, rng);
    reports.push_back(c.sum_part);
    reports.push_back(c.l_part);
    RngStream rng3(cfg.seed, hash_combine(0x4833ull, static_cast<std::uint64_t>(p * 1024)));
    reports.push_back(estimate_h3(law, p, n, rng3));
  }
  {
    RngStream rng(cfg.seed, 0x4E4543ull);
    reports.push_back(estimate_necessary(law, n, rng));
  }
  {
    RngStream rng(cfg.seed, 0x52D3ull);
    reports.push_back(estimate_rstar_negmoment(law, cfg.experiment.delta, n, rng));
  }

  bool all_ok = true;
  for (const auto& r : reports) all_ok = all_ok && r.verdict == Verdict::Satisfied;

  if (cfg.output.format == "csv") {
    std::string csv = rundetail::provenance_csv(cfg);
    csv += "name,estimate,std_error,n_samples,verdict,censor_rate,note\n";
    for (const auto& r : reports)
      csv += r.name + "," + rundetail::fmt(r.estimate) + "," +
             rundetail::fmt(r.std_error) + "," + std::to_string(r.n_samples) +
             "," + to_string(r.verdict) + "," + rundetail::fmt(r.censor_rate) +
             "," + r.note + "\n";
    rundetail::write_file(cfg.output.path, csv);
  } else {
    nlohmann::json j;
    j["config"] = cfg.to_json();
    j["reports"] = nlohmann::json::array();
    for (const auto& r : reports) j["reports"].push_back(rundetail::report_json(r));
    j["all_satisfied"] = all_ok;
    rundetail::write_file(cfg.output.path, j.dump(2) + "\n");
  }
  for (const auto& r : reports)
    log << r.name << ": " << to_string(r.verdict) << " (estimate "
        << r.estimate << " +- " << r.std_error << ")\n";
  return all_ok ? 0 : 1;
}

// reps distance matrices at (k, depth); deterministic per (config, seed);
// every matrix is validated as an exact finite metric before writing.
inline int cmd_sample_matrices(const ExperimentConfig& cfg,
                               std::ostream& log = std::cerr,
                               unsigned nthreads = 1) {
  const BranchLaw law = cfg.make_law();
  const EngineOptions opt = cfg.engine_options();
  const int reps = cfg.experiment.reps;
  const std::uint32_t k = cfg.experiment.k;
  const int depth = cfg.engine.depth;
  std::vector<DistanceMatrixSample> mats(reps);
  parallel_for_index(reps, nthreads, [&](std::size_t rep) {
    ThetaTrie trie(law, hash_combine(cfg.seed, 0x4D41ull + rep), opt);
    RngStream rng(cfg.seed, hash_combine(0x505453ull, rep));
    mats[rep] = trie.distance_matrix(k, depth, rng);
  });

  std::uint64_t violations = 0;
  const double tol = 1e-9;
  for (const auto& m : mats) {
    const std::uint32_t n = k + 1;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (m.at(i, i) != 0.0) ++violations;
      for (std::uint32_t j = i + 1; j < n; ++j) {
        if (m.at(i, j) != m.at(j, i)) ++violations;
        for (std::uint32_t l = 0; l < n; ++l)
          if (m.at(i, j) > m.at(i, l) + m.at(l, j) + tol) ++violations;
      }
    }
  }

  if (cfg.output.format == "csv") {
    std::string csv = rundetail::provenance_csv(cfg);
    csv += "rep,i,j,d\n";
    for (int rep = 0; rep < reps; ++rep)
      for (std::uint32_t i = 0; i <= k; ++i)
        for (std::uint32_t j = i + 1; j <= k; ++j)
          csv += std::to_string(rep) + "," + std::to_string(i) + "," +
                 std::to_string(j) + "," + rundetail::fmt(mats[rep].at(i, j)) +
                 "\n";
    rundetail::write_file(cfg.output.path, csv);
  } else {
    nlohmann::json j;
    j["config"] = cfg.to_json();
    j["matrices"] = nlohmann::json::array();
    for (int rep = 0; rep < reps; ++rep) {
      nlohmann::json entries = nlohmann::json::array();
      for (std::uint32_t i = 0; i <= k; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::uint32_t jj = 0; jj <= k; ++jj) row.push_back(mats[rep].at(i, jj));
        entries.push_back(row);
      }
      j["matrices"].push_back({{"rep", rep},
                               {"depth", depth},
                               {"k", k},
                               {"seed", cfg.seed},
                               {"entries", entries}});
    }
    j["metric_violations"] = violations;
    rundetail::write_file(cfg.output.path, j.dump(2) + "\n");
  }
  log << reps << " matrices written, metric violations: " << violations << "\n";
  return violations == 0 ? 0 : 1;
}

inline int cmd_convergence(const ExperimentConfig& cfg,
                           std::ostream& log = std::cerr) {
  const BranchLaw law = cfg.make_law();
  if (cfg.experiment.depths.empty())
    throw ConfigError("experiment.depths: must be a non-empty increasing list");
  const ConvergenceProfile prof = convergence_profile(
      law, cfg.experiment.depths, cfg.experiment.k, cfg.experiment.reps,
      cfg.seed, cfg.engine_options(), cfg.experiment.coupled,
      cfg.experiment.permutations);
  if (cfg.output.format == "csv") {
    std::string csv = rundetail::provenance_csv(cfg);
    csv += "depth,discrepancy,p_value,mean_height\n";
    for (std::size_t i = 0; i < prof.depths.size(); ++i) {
      csv += std::to_string(prof.depths[i]) + ",";
      if (i == 0)
        csv += ",";
      else
        csv += rundetail::fmt(prof.discrepancy[i - 1]) + "," +
               rundetail::fmt(prof.p_value[i - 1]);
      csv += "," + rundetail::fmt(prof.mean_height[i]) + "\n";
    }
    rundetail::write_file(cfg.output.path, csv);
  } else {
    nlohmann::json j;
    j["config"] = cfg.to_json();
    j["depths"] = prof.depths;
    j["discrepancy"] = prof.discrepancy;
    j["p_value"] = prof.p_value;
    j["mean_height"] = prof.mean_height;
    j["ratios"] = prof.ratios;
    j["coupled"] = prof.coupled;
    rundetail::write_file(cfg.output.path, j.dump(2) + "\n");
  }
  log << "convergence profile over " << prof.depths.size() << " depths written\n";
  return 0;
}

inline int cmd_dimension(const ExperimentConfig& cfg, const std::string& mode,
                         std::ostream& log = std::cerr) {
  const BranchLaw law = cfg.make_law();
  const EngineOptions opt = cfg.engine_options();
  DimensionFit fit;
  if (mode == "minkowski") {
    if (cfg.experiment.eps_grid.empty())
      throw ConfigError("experiment.eps_grid: required for minkowski mode");
    fit = minkowski_fit(law, cfg.engine.depth, cfg.experiment.n_points,
                        cfg.experiment.eps_grid, cfg.experiment.reps, cfg.seed,
                        opt);
  } else if (mode == "hausdorff") {
    if (cfg.experiment.radii_grid.empty())
      throw ConfigError("experiment.radii_grid: required for hausdorff mode");
    fit = hausdorff_probe(law, cfg.engine.depth, cfg.experiment.n_centers,
                          cfg.experiment.n_mass_points,
                          cfg.experiment.radii_grid, cfg.experiment.reps,
                          cfg.seed, opt);
  } else {
    throw ConfigError("dimension mode must be minkowski or hausdorff");
  }
  if (cfg.output.format == "csv") {
    std::string csv = rundetail::provenance_csv(cfg);
    csv += "rep,epsilon,N\n";
    for (const auto& r : fit.rows)
      csv += rundetail::fmt(r[0]) + "," + rundetail::fmt(r[1]) + "," +
             rundetail::fmt(r[2]) + "\n";
    rundetail::write_file(cfg.output.path, csv);
  } else {
    nlohmann::json j;
    j["config"] = cfg.to_json();
    j["mode"] = fit.mode;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r2"] = fit.r2;
    j["slope_stderr"] = fit.slope_stderr;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : fit.rows) rows.push_back({r[0], r[1], r[2]});
    j["rows"] = rows;
    rundetail::write_file(cfg.output.path, j.dump(2) + "\n");
  }
  log << fit.mode << " slope: " << fit.slope << " (r2 " << fit.r2 << ")\n";
  return 0;
}

inline int cmd_cutline(const ExperimentConfig& cfg,
                       std::ostream& log = std::cerr) {
  const BranchLaw law = cfg.make_law();
  ThetaTrie trie(law, hash_combine(cfg.seed, 0xC31ull), cfg.engine_options());
  const CutLine line = trie.cut_line(cfg.experiment.epsilon,
                                     cfg.engine.max_nodes);
  double mass = 0.0, smass = 0.0;
  for (const double m : line.r_mass) mass += m;
  for (const double m : line.s_mass) smass += m;
  double pending_mass = 0.0;
  for (const double m : line.pending_r_mass) pending_mass += m;
  const bool conserved = std::abs(mass + pending_mass - 1.0) <= 1e-6;

  if (cfg.output.format == "csv") {
    std::string csv = rundetail::provenance_csv(cfg);
    csv += "# r_mass_total = " + rundetail::fmt(mass) +
           ", pending = " + rundetail::fmt(pending_mass) +
           ", budget_exhausted = " + (line.budget_exhausted ? "true" : "false") +
           "\n";
    csv += "theta,R_theta,S_theta\n";
    for (std::size_t i = 0; i < line.nodes.size(); ++i)
      csv += rundetail::word_string(line.nodes[i]) + "," +
             rundetail::fmt(line.r_mass[i]) + "," +
             rundetail::fmt(line.s_mass[i]) + "\n";
    rundetail::write_file(cfg.output.path, csv);
  } else {
    nlohmann::json j;
    j["config"] = cfg.to_json();
    j["epsilon"] = line.epsilon;
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < line.nodes.size(); ++i)
      nodes.push_back({{"theta", rundetail::word_string(line.nodes[i])},
                       {"r", line.r_mass[i]},
                       {"s", line.s_mass[i]},
                       {"remainder", static_cast<bool>(line.is_remainder[i])}});
    j["nodes"] = nodes;
    j["r_mass_total"] = mass;
    j["s_mass_total"] = smass;
    j["pending_mass"] = pending_mass;
    j["budget_exhausted"] = line.budget_exhausted;
    j["mass_conserved"] = conserved;
    rundetail::write_file(cfg.output.path, j.dump(2) + "\n");
  }
  log << line.nodes.size() << " cut-line nodes, r-mass " << mass
      << (line.budget_exhausted ? " (budget exhausted)" : "") << "\n";
  return conserved && !line.budget_exhausted ? 0 : 1;
}

}  // namespace recmet
