#pragma once

// Command-line front end. Exit codes: 0 success, 1 property failure,
// 2 usage or input error.

#include "sparseproj/harness.hpp"
#include "sparseproj/io.hpp"
#include "sparseproj/oracle.hpp"
#include "sparseproj/projections.hpp"
#include "sparseproj/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sparseproj::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

/// Test seams. Empty projectors mean the library defaults.
struct Hooks {
  GreedyProjector selftest_simplex;
  GreedyProjector selftest_hyperplane;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const std::set<std::string>& flag_names() {
  static const std::set<std::string> names = {"no-timing", "convex-only", "paper-scale", "noiseless"};
  return names;
}

/// Splices `key=value` lines from a --config file into the argument list,
/// right after the subcommand, skipping keys already given on the command
/// line so explicit flags win.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config requires a file path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!path) return kept;

  std::set<std::string> given;
  for (const auto& a : kept) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  std::string text;
  try {
    text = read_file(*path);
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
  std::vector<std::string> extra;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = sparseproj::detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(*path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = sparseproj::detail::trim(line.substr(0, eq));
    const std::string value = sparseproj::detail::trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty()) throw UsageError(*path + ":" + std::to_string(lineno) + ": empty key");
    if (given.count(key)) continue;
    if (flag_names().count(key)) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") extra.push_back("--" + key);
      else if (!(value == "false" || value == "0" || value == "no" || value == "off"))
        throw UsageError(*path + ":" + std::to_string(lineno) + ": flag '" + key + "' needs a boolean value");
    } else {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  // args[0] is the program name, args[1] the subcommand (if any).
  const std::size_t at = std::min<std::size_t>(kept.size(), 2);
  kept.insert(kept.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
  return kept;
}

struct Common {
  std::uint64_t seed = 0;
  bool no_timing = false;
  unsigned threads = 0;
  std::string out_path;
  std::string pivot_path;
};

inline void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master seed (64-bit unsigned)");
  sub->add_flag("--no-timing", c.no_timing, "Omit timing fields from records");
  sub->add_option("--threads", c.threads, "Worker threads (default: SPARSEPROJ_THREADS or hardware)");
  sub->add_option("--out", c.out_path, "JSON-lines output file (default: stdout)");
  sub->add_option("--pivot", c.pivot_path, "CSV of medians, grid x method");
}

/// Streams records to stdout, or writes them atomically to --out and prints
/// the median table instead.
inline int run_experiment(const Common& c, std::ostream& out, const std::string& metric, const std::string& grid_label,
                          const std::function<std::vector<ExperimentRecord>(const RunOptions&)>& run) {
  RunOptions opts;
  opts.master_seed = c.seed;
  opts.timing = !c.no_timing;
  opts.threads = c.threads;
  if (c.out_path.empty()) opts.sink = [&](const ExperimentRecord& r) { out << r.to_json(opts.timing) << '\n'; };
  const auto records = run(opts);
  const auto rows = aggregate_median(records, metric);
  const std::string pivot = median_pivot_csv(rows, grid_label);
  if (!c.out_path.empty()) {
    write_atomic(c.out_path, records_to_jsonl(records, opts.timing));
    out << "median " << metric << '\n' << pivot;
  }
  if (!c.pivot_path.empty()) write_atomic(c.pivot_path, pivot);
  std::size_t failed = 0;
  for (const auto& r : records) failed += !r.ok();
  if (failed) out << failed << " method run(s) failed; see records with status \"error\"\n";
  return exit_ok;
}

}  // namespace detail

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr,
                   const Hooks& hooks = {}) {
  try {
    args = detail::expand_config(std::move(args));
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  CLI::App app{"Sparse projections onto simplex and hyperplane constraints, with experiment drivers"};
  app.require_subcommand(1);

  // project
  auto* project_cmd = app.add_subcommand("project", "Project a vector (single-column CSV)");
  std::string in_path, out_path, set = "simplex";
  std::optional<std::size_t> k;
  std::optional<double> lambda;
  bool convex_only = false;
  project_cmd->add_option("--input", in_path, "Input vector CSV")->required();
  project_cmd->add_option("--output", out_path, "Output vector CSV (a .json sidecar is written next to it)")->required();
  project_cmd->add_option("--k", k, "Sparsity level");
  project_cmd->add_option("--lambda", lambda, "Constraint level")->required();
  project_cmd->add_option("--set", set, "simplex | hyperplane")->check(CLI::IsMember({"simplex", "hyperplane"}));
  project_cmd->add_flag("--convex-only", convex_only, "Convex projection only (ignores --k)");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive support search, compared with the greedy projector");
  std::string oracle_in, oracle_set = "simplex";
  std::size_t oracle_k = 0;
  double oracle_lambda = 0.0;
  std::uint64_t budget = OracleOptions{}.max_supports;
  oracle_cmd->add_option("--input", oracle_in, "Input vector CSV")->required();
  oracle_cmd->add_option("--k", oracle_k, "Sparsity level")->required();
  oracle_cmd->add_option("--lambda", oracle_lambda, "Constraint level")->required();
  oracle_cmd->add_option("--set", oracle_set, "simplex | hyperplane")->check(CLI::IsMember({"simplex", "hyperplane"}));
  oracle_cmd->add_option("--budget", budget, "Maximum number of supports to enumerate");

  // quantum
  auto* quantum_cmd = app.add_subcommand("quantum", "Low-rank density matrix recovery from Pauli measurements");
  QuantumSpec qs;
  detail::Common qc;
  std::optional<int> qubits;
  double snr = 30.0;
  bool noiseless = false, paper_scale = false;
  quantum_cmd->add_option("--qubits", qubits, "Number of qubits (default 6)");
  quantum_cmd->add_option("--qubit-cap", qs.qubit_cap, "Refuse more qubits than this");
  quantum_cmd->add_flag("--paper-scale", paper_scale, "Full-size run: 8 qubits");
  quantum_cmd->add_option("--rank", qs.rank, "Rank of the ground-truth state");
  quantum_cmd->add_option("--trials", qs.trials, "Trials per grid point");
  quantum_cmd->add_option("--grid", qs.grid, "Measurement counts as multiples of d*r")->delimiter(',');
  quantum_cmd->add_option("--snr", snr, "Measurement SNR in dB");
  quantum_cmd->add_flag("--noiseless", noiseless, "No measurement noise");
  quantum_cmd->add_option("--methods", qs.methods, "Subset of convex-1,convex-2,nonconvex-random,nonconvex-convex-init")
      ->delimiter(',');
  quantum_cmd->add_option("--nonconvex-step", qs.nonconvex_step, "Step constant c, mu = c / (2 ||A||^2)");
  quantum_cmd->add_option("--max-iters", qs.max_iters, "Iteration cap per solve");
  quantum_cmd->add_option("--tol", qs.tol, "Relative iterate change tolerance");
  quantum_cmd->add_option("--bracketing-tol", qs.bracketing_tol, "Tolerance for each lambda probe of convex-1");
  quantum_cmd->add_option("--bracketing-points", qs.bracketing.grid_points, "Geometric lambda grid size");
  quantum_cmd->add_option("--bisection-steps", qs.bracketing.bisection_steps, "Bisection refinements");
  detail::add_common(quantum_cmd, qc);

  // density
  auto* density_cmd = app.add_subcommand("density", "Sparse kernel density estimation on the five-component mixture");
  DensitySpec ds;
  detail::Common dc;
  density_cmd->add_option("--samples", ds.samples, "Sample size");
  density_cmd->add_option("--sigma", ds.sigma, "Kernel width");
  density_cmd->add_option("--ks", ds.ks, "Sparsity levels")->delimiter(',');
  density_cmd->add_option("--trials", ds.trials, "Independent samples");
  density_cmd->add_option("--max-iters", ds.max_iters, "Iteration cap per fit");
  density_cmd->add_option("--tol", ds.tol, "Relative iterate change tolerance");
  detail::add_common(density_cmd, dc);

  // portfolio
  auto* portfolio_cmd = app.add_subcommand("portfolio", "Sparse budget-constrained regression (portfolio update)");
  PortfolioSpec ps;
  detail::Common pc;
  portfolio_cmd->add_option("--p", ps.p, "Number of assets");
  portfolio_cmd->add_option("--k", ps.k, "Sparsity level");
  portfolio_cmd->add_option("--trials", ps.trials, "Trials per grid point");
  portfolio_cmd->add_option("--grid", ps.grid, "Sample ratios m/p")->delimiter(',');
  portfolio_cmd->add_option("--step", ps.step, "Step constant c, mu = c / (2 ||X||^2)");
  portfolio_cmd->add_option("--max-iters", ps.max_iters, "Iteration cap per solve");
  portfolio_cmd->add_option("--tol", ps.tol, "Relative iterate change tolerance");
  detail::add_common(portfolio_cmd, pc);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Projection runtime versus dimension");
  BenchSpec bs;
  detail::Common bc;
  bench_cmd->add_option("--ps", bs.ps, "Dimensions")->delimiter(',');
  bench_cmd->add_option("--k", bs.k, "Sparsity level");
  bench_cmd->add_option("--lambda", bs.lambda, "Constraint level (> 0)");
  bench_cmd->add_option("--runs", bs.runs, "Runs per dimension");
  detail::add_common(bench_cmd, bc);

  // selftest
  auto* selftest_cmd = app.add_subcommand("selftest", "Greedy projectors against the exhaustive oracle");
  OracleSuiteOptions st;
  selftest_cmd->add_option("--trials", st.trials, "Instances per projector");
  selftest_cmd->add_option("--seed", st.seed, "Seed");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*project_cmd) {
      const DenseVector w = read_csv_vector(in_path);
      ConstraintSpec spec;
      if (convex_only) {
        spec = set == "simplex" ? ConstraintSpec::simplex_convex(*lambda) : ConstraintSpec::hyperplane_convex(*lambda);
      } else {
        if (!k) throw UsageError("--k is required unless --convex-only is given");
        spec = set == "simplex" ? ConstraintSpec::simplex_sparse(*k, *lambda)
                                : ConstraintSpec::hyperplane_sparse(*k, *lambda);
      }
      const auto res = project(w, spec);
      write_csv(out_path, res.beta.to_dense());
      nlohmann::ordered_json side;
      side["set"] = set;
      side["convex_only"] = convex_only;
      if (k && !convex_only) side["k"] = *k;
      side["lambda"] = *lambda;
      side["support"] = res.beta.support;
      side["tau"] = res.tau;
      side["distance_sq"] = res.distance_sq;
      side["objective"] = res.objective;
      write_atomic(out_path + ".json", side.dump(2) + "\n");
      return exit_ok;
    }
    if (*oracle_cmd) {
      const DenseVector w = read_csv_vector(oracle_in);
      const auto spec = oracle_set == "simplex" ? ConstraintSpec::simplex_sparse(oracle_k, oracle_lambda)
                                                : ConstraintSpec::hyperplane_sparse(oracle_k, oracle_lambda);
      OracleOptions oo;
      oo.max_supports = budget;
      const auto o = oracle_project(w, spec, oo);
      const auto g = project(w, spec);
      const bool match = std::abs(g.distance_sq - o.best_distance_sq) <= 1e-9 * (1.0 + o.best_distance_sq);
      nlohmann::ordered_json j;
      j["support"] = o.best_support;
      j["distance_sq"] = o.best_distance_sq;
      j["enumerated"] = o.enumerated;
      j["greedy_support"] = g.beta.support;
      j["greedy_distance_sq"] = g.distance_sq;
      j["match"] = match;
      out << j.dump() << '\n';
      return match ? exit_ok : exit_failure;
    }
    if (*quantum_cmd) {
      if (paper_scale) qs.qubits = QuantumSpec::paper_scale().qubits;
      if (qubits) qs.qubits = *qubits;
      if (noiseless) qs.snr_db = std::nullopt;
      else qs.snr_db = snr;
      return detail::run_experiment(qc, out, "rel_error", "m_over_dr",
                                    [&](const RunOptions& o) { return run_quantum_experiment(qs, o); });
    }
    if (*density_cmd) {
      return detail::run_experiment(dc, out, "ise", "k", [&](const RunOptions& o) { return run_density_experiment(ds, o); });
    }
    if (*portfolio_cmd) {
      return detail::run_experiment(pc, out, "rel_error", "m_over_p",
                                    [&](const RunOptions& o) { return run_portfolio_experiment(ps, o); });
    }
    if (*bench_cmd) {
      std::vector<ExperimentRecord> records;
      const int code = detail::run_experiment(bc, out, "projection_ms", "p", [&](const RunOptions& o) {
        records = run_projection_bench(bs, o);
        return records;
      });
      if (!bc.out_path.empty()) {
        for (const auto& row : bench_ratios(records))
          out << "ratio " << row.method << " p=" << format_double(row.grid_value) << ": " << row.median << '\n';
      }
      return code;
    }
    if (*selftest_cmd) {
      if (st.trials < 1) throw UsageError("--trials must be >= 1");
      if (hooks.selftest_simplex) st.simplex = hooks.selftest_simplex;
      if (hooks.selftest_hyperplane) st.hyperplane = hooks.selftest_hyperplane;
      bool all = true;
      for (const auto& p : run_oracle_suite(st)) {
        if (p.passed()) {
          out << "PASS " << p.name << " (" << p.checked << " instances)\n";
        } else {
          all = false;
          out << "FAIL " << p.name << " (" << p.failures << " of " << p.checked << "): " << p.counterexample << '\n';
        }
      }
      return all ? exit_ok : exit_failure;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const BudgetError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_usage;
}

inline int run_cli(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc));
}

}  // namespace sparseproj::cli
