#pragma once

// Experiment orchestration: seeded trials on a worker pool, one JSON-lines
// record per (grid point, trial, method), emitted in (grid, trial) order.

#include "sparseproj/density.hpp"
#include "sparseproj/io.hpp"
#include "sparseproj/matrixproj.hpp"
#include "sparseproj/portfolio.hpp"
#include "sparseproj/projections.hpp"
#include "sparseproj/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace sparseproj {

struct ExperimentRecord {
  std::string experiment;
  std::string method;
  std::string grid_label;
  double grid_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string error;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, double>> timings;  // dropped in no-timing mode

  bool ok() const { return status == "ok"; }

  std::optional<double> metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    for (const auto& [k, v] : timings)
      if (k == name) return v;
    return std::nullopt;
  }

  std::string to_json(bool timing) const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["method"] = method;
    j["grid_label"] = grid_label;
    j["grid_value"] = grid_value;
    j["trial"] = trial;
    j["seed"] = seed;
    j["status"] = status;
    if (!error.empty()) j["error"] = error;
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [k, v] : metrics) m[k] = v;
    j["metrics"] = m;
    if (timing) {
      nlohmann::ordered_json t = nlohmann::ordered_json::object();
      for (const auto& [k, v] : timings) t[k] = v;
      j["timing"] = t;
    }
    return j.dump();
  }
};

inline std::string records_to_jsonl(const std::vector<ExperimentRecord>& records, bool timing) {
  std::string out;
  for (const auto& r : records) {
    out += r.to_json(timing);
    out += '\n';
  }
  return out;
}

/// SPARSEPROJ_THREADS when set to a positive integer, else the hardware count.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("SPARSEPROJ_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct RunOptions {
  std::uint64_t master_seed = 0;
  bool timing = true;
  unsigned threads = 0;  // 0: default_thread_count()
  std::function<void(const ExperimentRecord&)> sink;  // called in order, from one thread at a time
};

namespace detail {

/// Runs task(i) for i in [0, n) on `threads` workers. Results are handed to
/// the sink strictly in index order as soon as every earlier task is done.
inline std::vector<ExperimentRecord> run_ordered(std::size_t n, const RunOptions& opts,
                                                 const std::function<std::vector<ExperimentRecord>(std::size_t)>& task) {
  std::vector<std::optional<std::vector<ExperimentRecord>>> slots(n);
  std::vector<ExperimentRecord> out;
  std::mutex mu;
  std::size_t emitted = 0;
  std::atomic<std::size_t> next{0};

  auto flush_locked = [&] {
    while (emitted < n && slots[emitted]) {
      for (auto& r : *slots[emitted]) {
        if (opts.sink) opts.sink(r);
        out.push_back(std::move(r));
      }
      slots[emitted].reset();
      ++emitted;
    }
  };
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      auto recs = task(i);
      std::lock_guard<std::mutex> lock(mu);
      slots[i] = std::move(recs);
      flush_locked();
    }
  };

  const unsigned threads = std::min<std::size_t>(opts.threads ? opts.threads : default_thread_count(), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

/// Runs one method; any exception becomes an error record rather than
/// aborting the experiment.
template <typename F>
ExperimentRecord run_method(ExperimentRecord base, const std::string& method, F&& body) {
  base.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(base);
  } catch (const std::exception& e) {
    base.status = "error";
    base.error = e.what();
    base.metrics.clear();
    base.timings.clear();
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  base.timings.emplace_back("wall_ms", ms);
  return base;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Aggregation

struct MedianRow {
  std::string method;
  double grid_value = 0.0;
  double median = 0.0;
  std::size_t completed = 0;
  std::size_t failed = 0;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw DomainError("median_of: empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Median of `metric` per (method, grid value) over completed trials; failed
/// trials are counted but excluded. Rows follow first appearance order.
inline std::vector<MedianRow> aggregate_median(const std::vector<ExperimentRecord>& records, const std::string& metric) {
  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, std::pair<std::vector<double>, std::size_t>> groups;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.method, r.grid_value);
    if (!groups.count(key)) order.push_back(key);
    auto& g = groups[key];
    const auto v = r.metric(metric);
    if (r.ok() && v) g.first.push_back(*v);
    else if (!r.ok()) ++g.second;
  }
  std::vector<MedianRow> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    if (g.first.empty() && g.second == 0) continue;
    MedianRow row{key.first, key.second, 0.0, g.first.size(), g.second};
    row.median = g.first.empty() ? std::numeric_limits<double>::quiet_NaN() : median_of(g.first);
    out.push_back(row);
  }
  return out;
}

inline std::optional<double> find_median(const std::vector<MedianRow>& rows, const std::string& method, double grid_value) {
  for (const auto& r : rows)
    if (r.method == method && std::abs(r.grid_value - grid_value) <= 1e-12 * (1.0 + std::abs(grid_value))) return r.median;
  return std::nullopt;
}

/// Grid x method table of medians, methods as columns in first-seen order.
inline std::string median_pivot_csv(const std::vector<MedianRow>& rows, const std::string& grid_label) {
  std::vector<std::string> methods;
  std::vector<double> grid;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(grid.begin(), grid.end(), r.grid_value) == grid.end()) grid.push_back(r.grid_value);
  }
  std::string out = grid_label;
  for (const auto& m : methods) out += "," + m;
  out += '\n';
  for (double g : grid) {
    out += format_double(g);
    for (const auto& m : methods) {
      out += ',';
      if (const auto v = find_median(rows, m, g)) out += format_double(*v);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quantum state tomography

namespace method {
inline constexpr const char* convex_bracketing = "convex-1";
inline constexpr const char* convex_traceball = "convex-2";
inline constexpr const char* nonconvex_random = "nonconvex-random";
inline constexpr const char* nonconvex_convex_init = "nonconvex-convex-init";
}  // namespace method

struct QuantumSpec {
  int qubits = 6;
  int qubit_cap = 8;
  std::size_t rank = 2;
  int trials = 10;
  std::vector<double> grid = {2.0, 2.4, 2.8, 3.2, 3.6, 4.0, 5.0};  // m / (d r)
  std::optional<double> snr_db = 30.0;                          // nullopt: noiseless
  std::vector<std::string> methods = {method::convex_bracketing, method::convex_traceball, method::nonconvex_random,
                                      method::nonconvex_convex_init};
  double nonconvex_step = 3.0;  // FixedOverNormSq constant
  double convex_step = 1.0;     // 1/L for the accelerated convex solvers
  int max_iters = 3000;
  double tol = 1e-7;
  double bracketing_tol = 1e-5;
  BracketingOptions bracketing;

  /// 8 qubits: the full-size run.
  static QuantumSpec paper_scale() {
    QuantumSpec s;
    s.qubits = 8;
    return s;
  }

  void validate() const {
    detail::require(qubits >= 1, "quantum: qubits must be >= 1");
    detail::require(qubits <= qubit_cap, "quantum: " + std::to_string(qubits) + " qubits exceeds the cap of " +
                                             std::to_string(qubit_cap) +
                                             " (raise the cap explicitly, or use --paper-scale for 8 qubits)");
    const auto d = std::size_t{1} << qubits;
    detail::require(rank >= 1 && rank <= d, "quantum: rank outside [1, d]");
    detail::require(trials >= 1, "quantum: trials must be >= 1");
    detail::require(!grid.empty(), "quantum: empty measurement grid");
    for (double g : grid) {
      detail::require(g > 0.0, "quantum: grid multipliers must be > 0");
      detail::require(g * double(d * rank) <= double(d) * double(d), "quantum: m exceeds d^2 observables");
    }
    for (const auto& m : methods)
      detail::require(m == method::convex_bracketing || m == method::convex_traceball || m == method::nonconvex_random ||
                          m == method::nonconvex_convex_init,
                      "quantum: unknown method '" + m + "'");
  }
};

inline std::vector<ExperimentRecord> run_quantum_experiment(const QuantumSpec& spec, const RunOptions& opts = {}) {
  spec.validate();
  using M = RealMatrix;
  const auto d = Eigen::Index{1} << spec.qubits;
  const std::size_t dr = static_cast<std::size_t>(d) * spec.rank;
  const std::set<std::string> wanted(spec.methods.begin(), spec.methods.end());
  const std::string id = spec.snr_db ? "quantum" : "quantum-noiseless";
  const auto trials = static_cast<std::size_t>(spec.trials);

  auto task = [&](std::size_t idx) {
    const std::size_t g = idx / trials, t = idx % trials;
    ExperimentRecord base;
    base.experiment = id;
    base.grid_label = "m_over_dr";
    base.grid_value = spec.grid[g];
    base.trial = static_cast<int>(t);
    base.seed = derive_seed(opts.master_seed, id, {g, t});
    Rng rng(base.seed);
    const std::uint64_t op_seed = rng(), state_seed = rng(), noise_seed = rng(), init_seed = rng();
    const auto m = static_cast<std::size_t>(std::llround(spec.grid[g] * double(dr)));

    std::vector<ExperimentRecord> out;
    std::optional<PauliEnsemble> op;
    M truth;
    DenseVector y;
    double norm_sq = 0.0;
    try {
      op = pauli_operator(spec.qubits, m, op_seed);
      truth = random_density_matrix(d, static_cast<Eigen::Index>(spec.rank), state_seed);
      y = op->apply(truth);
      if (spec.snr_db) y = add_noise_snr(y, *spec.snr_db, noise_seed);
      const double n = operator_norm<M>(*op, 50, op_seed ^ 0x9e3779b97f4a7c15ULL);
      norm_sq = n * n;
    } catch (const std::exception& e) {
      for (const auto& name : spec.methods) {
        ExperimentRecord r = base;
        r.method = name;
        r.status = "error";
        r.error = e.what();
        out.push_back(r);
      }
      return out;
    }
    base.metrics.emplace_back("m", static_cast<double>(m));
    const double truth_norm = truth.norm();
    const std::size_t r = spec.rank;

    SolverConfig nonconvex;
    nonconvex.step = StepRule::fixed_over_norm_sq(spec.nonconvex_step);
    nonconvex.max_iters = spec.max_iters;
    nonconvex.tol = spec.tol;
    nonconvex.record_supports = false;
    SolverConfig convex = nonconvex;
    convex.step = StepRule::fixed_over_norm_sq(spec.convex_step);
    convex.momentum = Momentum::Nesterov;

    auto rank_projector = [r](const M& w) {
      const M sym = (w + w.transpose()) / 2.0;
      return project_rank_trace<double>(sym, r).matrix;
    };
    auto traceball = [](const M& w) {
      const M sym = (w + w.transpose()) / 2.0;
      return project_psd_traceball<double>(sym);
    };
    auto fill = [&](ExperimentRecord& rec, const M& estimate, const SolveTrace& trace) {
      rec.metrics.emplace_back("rel_error", (estimate - truth).norm() / truth_norm);
      rec.metrics.emplace_back("iterations", trace.iteration_count());
      rec.metrics.emplace_back("converged", trace.status == SolveStatus::Converged ? 1.0 : 0.0);
      rec.timings.emplace_back("ms_per_iter", 1e3 * trace.seconds_per_iteration());
    };

    if (wanted.count(method::convex_bracketing)) {
      out.push_back(detail::run_method(base, method::convex_bracketing, [&](ExperimentRecord& rec) {
        SolverConfig cfg = convex;
        cfg.tol = spec.bracketing_tol;
        const auto res = lambda_bracketing_solve<double>(*op, y, r, cfg, spec.bracketing, norm_sq);
        rec.metrics.emplace_back("rel_error", (res.estimate.matrix - truth).norm() / truth_norm);
        rec.metrics.emplace_back("iterations", res.total_iterations);
        rec.metrics.emplace_back("rank_found", res.found ? 1.0 : 0.0);
        rec.metrics.emplace_back("lambda", res.lambda);
        rec.timings.emplace_back("ms_per_iter", res.total_iterations ? 1e3 * res.seconds / res.total_iterations : 0.0);
      }));
    }
    std::optional<M> convex_solution;
    if (wanted.count(method::convex_traceball) || wanted.count(method::nonconvex_convex_init)) {
      auto rec = detail::run_method(base, method::convex_traceball, [&](ExperimentRecord& rec) {
        auto res = solve_pgd<M>(*op, y, traceball, convex, std::nullopt, norm_sq);
        M x = res.solution;
        if (x.trace() > 0.0) x /= x.trace();
        fill(rec, x, res.trace);
        convex_solution = std::move(res.solution);
      });
      if (wanted.count(method::convex_traceball)) out.push_back(rec);
    }
    if (wanted.count(method::nonconvex_random)) {
      out.push_back(detail::run_method(base, method::nonconvex_random, [&](ExperimentRecord& rec) {
        SolverConfig cfg = nonconvex;
        cfg.init = InitKind::Random;
        cfg.init_seed = init_seed;
        const auto res = solve_pgd<M>(*op, y, rank_projector, cfg, std::nullopt, norm_sq);
        fill(rec, res.solution, res.trace);
      }));
    }
    if (wanted.count(method::nonconvex_convex_init)) {
      out.push_back(detail::run_method(base, method::nonconvex_convex_init, [&](ExperimentRecord& rec) {
        if (!convex_solution) throw SolverError("convex initializer failed");
        SolverConfig cfg = nonconvex;
        cfg.init = InitKind::Warm;
        const auto res = solve_pgd<M>(*op, y, rank_projector, cfg, convex_solution, norm_sq);
        fill(rec, res.solution, res.trace);
      }));
    }
    return out;
  };
  return detail::run_ordered(spec.grid.size() * trials, opts, task);
}

// ---------------------------------------------------------------------------
// Sparse kernel density estimation

struct DensitySpec {
  std::size_t samples = 1000;
  double sigma = 1.0;
  std::vector<std::size_t> ks = {3, 5, 8, 10, 15};
  int trials = 10;
  std::size_t top = 5;  // mass-outside-top-k metric
  int max_iters = 3000;
  double tol = 1e-5;
  double grid_lo = -25.0, grid_hi = 10.0;
  std::size_t grid_points = 2000;

  void validate() const {
    detail::require(samples >= 2, "density: need at least 2 samples");
    detail::require(sigma > 0.0, "density: sigma must be > 0");
    detail::require(trials >= 1, "density: trials must be >= 1");
    detail::require(!ks.empty(), "density: empty k grid");
    for (auto k : ks) detail::require(k >= 1 && k <= samples, "density: k outside [1, samples]");
    detail::require(grid_points >= 2 && grid_hi > grid_lo, "density: bad evaluation grid");
  }
};

/// Weighted mean distance from each retained center to its nearest
/// mixture-component mean.
inline double cluster_distance(const KernelModel& model) {
  const auto means = FiveComponentMixture::means();
  double total = 0.0, mass = 0.0;
  for (Eigen::Index i = 0; i < model.weights.size(); ++i) {
    const double w = model.weights[i];
    if (w <= 0.0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (double mu : means) best = std::min(best, std::abs(model.centers[static_cast<std::size_t>(i)] - mu));
    total += w * best;
    mass += w;
  }
  return mass > 0.0 ? total / mass : 0.0;
}

inline std::vector<ExperimentRecord> run_density_experiment(const DensitySpec& spec, const RunOptions& opts = {}) {
  spec.validate();
  const std::string id = "density";
  const auto eval_grid = uniform_grid(spec.grid_lo, spec.grid_hi, spec.grid_points);

  auto task = [&](std::size_t t) {
    ExperimentRecord base;
    base.experiment = id;
    base.trial = static_cast<int>(t);
    base.seed = derive_seed(opts.master_seed, id, {t});
    std::vector<ExperimentRecord> out;

    std::vector<double> x;
    IseQuadratic q;
    double lambda_max = 0.0;
    try {
      x = sample_paper_mixture(spec.samples, base.seed);
      q = build_ise_quadratic(x, spec.sigma);
      lambda_max = Eigen::SelfAdjointEigenSolver<RealMatrix>(q.sigma, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    } catch (const std::exception& e) {
      ExperimentRecord r = base;
      r.method = "setup";
      r.status = "error";
      r.error = e.what();
      out.push_back(r);
      return out;
    }
    SolverConfig cfg;
    cfg.step = StepRule::fixed_over_norm_sq(1.0);
    cfg.max_iters = spec.max_iters;
    cfg.tol = spec.tol;
    cfg.record_supports = false;

    auto describe = [&](ExperimentRecord& rec, const KernelModel& model) {
      rec.metrics.emplace_back("ise", ise_against(model, FiveComponentMixture::pdf, eval_grid));
      rec.metrics.emplace_back("nnz", static_cast<double>(model.support().size()));
      rec.metrics.emplace_back("mass_outside_top", mass_outside_top(model.weights, std::min(spec.top, x.size())));
      rec.metrics.emplace_back("cluster_distance", cluster_distance(model));
    };
    auto fit = [&](ExperimentRecord& rec, const ConstraintSpec& cs) {
      const auto f = estimate_density(x, spec.sigma, cs, cfg, &q, lambda_max);
      describe(rec, f.model);
      rec.metrics.emplace_back("objective", f.objective);
      rec.metrics.emplace_back("iterations", f.trace.iteration_count());
    };

    base.grid_label = "k";
    base.grid_value = 0.0;  // baselines are not indexed by k
    out.push_back(detail::run_method(base, "parzen", [&](ExperimentRecord& rec) { describe(rec, parzen(x, spec.sigma)); }));
    out.push_back(detail::run_method(base, "convex-qp",
                                     [&](ExperimentRecord& rec) { fit(rec, ConstraintSpec::simplex_convex(1.0)); }));
    for (auto k : spec.ks) {
      ExperimentRecord b = base;
      b.grid_value = static_cast<double>(k);
      out.push_back(detail::run_method(b, "gssp", [&](ExperimentRecord& rec) { fit(rec, ConstraintSpec::simplex_sparse(k, 1.0)); }));
    }
    return out;
  };
  return detail::run_ordered(static_cast<std::size_t>(spec.trials), opts, task);
}

// ---------------------------------------------------------------------------
// Sparse portfolio update (regression form)

struct PortfolioSpec {
  std::size_t p = 500;
  std::size_t k = 50;
  int trials = 30;
  std::vector<double> grid = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};  // m / p
  double step = 1.0;  // FixedOverNormSq constant, shared by both methods
  int max_iters = 3000;
  double tol = 1e-5;

  void validate() const {
    detail::require(p >= 1 && k >= 1 && k <= p, "portfolio: need 1 <= k <= p");
    detail::require(trials >= 1, "portfolio: trials must be >= 1");
    detail::require(!grid.empty(), "portfolio: empty grid");
    for (double g : grid) detail::require(g > 0.0 && std::llround(g * double(p)) >= 1, "portfolio: grid values must give m >= 1");
  }
};

inline std::vector<ExperimentRecord> run_portfolio_experiment(const PortfolioSpec& spec, const RunOptions& opts = {}) {
  spec.validate();
  const std::string id = "portfolio";
  const auto trials = static_cast<std::size_t>(spec.trials);

  auto task = [&](std::size_t idx) {
    const std::size_t g = idx / trials, t = idx % trials;
    ExperimentRecord base;
    base.experiment = id;
    base.grid_label = "m_over_p";
    base.grid_value = spec.grid[g];
    base.trial = static_cast<int>(t);
    base.seed = derive_seed(opts.master_seed, id, {g, t});
    const auto m = static_cast<std::size_t>(std::llround(spec.grid[g] * double(spec.p)));
    std::vector<ExperimentRecord> out;
    std::optional<RegressionInstance> inst;
    try {
      inst = generate_regression_instance(spec.p, m, spec.k, base.seed);
    } catch (const std::exception& e) {
      for (const char* name : {"baseline", "gshp"}) {
        ExperimentRecord r = base;
        r.method = name;
        r.status = "error";
        r.error = e.what();
        out.push_back(r);
      }
      return out;
    }
    SolverConfig cfg;
    cfg.step = StepRule::fixed_over_norm_sq(spec.step);
    cfg.max_iters = spec.max_iters;
    cfg.tol = spec.tol;
    cfg.record_supports = false;

    auto describe = [&](ExperimentRecord& rec, const SolveResult<DenseVector>& res) {
      const auto nnz = static_cast<double>((res.solution.array() != 0.0).count());
      rec.metrics.emplace_back("rel_error", relative_error(res.solution, inst->beta_star));
      rec.metrics.emplace_back("nnz", nnz);
      rec.metrics.emplace_back("sum_violation", std::abs(res.solution.sum() - inst->lambda));
      rec.metrics.emplace_back("iterations", res.trace.iteration_count());
      rec.timings.emplace_back("ms_per_iter", 1e3 * res.trace.seconds_per_iteration());
    };
    std::optional<DenseVector> baseline;
    out.push_back(detail::run_method(base, "baseline", [&](ExperimentRecord& rec) {
      const auto res = solve_hyperplane_baseline(*inst, cfg);
      describe(rec, res);
      baseline = res.solution;
    }));
    out.push_back(detail::run_method(base, "gshp", [&](ExperimentRecord& rec) {
      const auto res = solve_sparse_update(*inst, cfg, baseline);
      describe(rec, res);
    }));
    return out;
  };
  return detail::run_ordered(spec.grid.size() * trials, opts, task);
}

// ---------------------------------------------------------------------------
// Projection runtime vs p

struct BenchSpec {
  std::vector<std::size_t> ps = {10000, 100000, 1000000};
  std::size_t k = 100;
  double lambda = 1.0;
  int runs = 20;

  void validate() const {
    detail::require(!ps.empty(), "bench: empty p grid");
    for (auto p : ps) detail::require(k >= 1 && k <= p, "bench: need 1 <= k <= p");
    detail::require(runs >= 1, "bench: runs must be >= 1");
    detail::require(lambda > 0.0, "bench: lambda must be > 0 (GSSP)");
  }
};

/// Timings are taken sequentially in the calling thread: parallel runs would
/// contend for memory bandwidth and distort the scaling.
inline std::vector<ExperimentRecord> run_projection_bench(const BenchSpec& spec, const RunOptions& opts = {}) {
  spec.validate();
  RunOptions serial = opts;
  serial.threads = 1;
  const auto runs = static_cast<std::size_t>(spec.runs);
  auto task = [&](std::size_t idx) {
    const std::size_t g = idx / runs, t = idx % runs;
    ExperimentRecord base;
    base.experiment = "bench";
    base.grid_label = "p";
    base.grid_value = static_cast<double>(spec.ps[g]);
    base.trial = static_cast<int>(t);
    base.seed = derive_seed(opts.master_seed, "bench", {g, t});
    Rng rng(base.seed);
    const DenseVector w = gaussian_vector(static_cast<Eigen::Index>(spec.ps[g]), rng);
    std::vector<ExperimentRecord> out;
    for (const char* name : {"gssp", "gshp"}) {
      out.push_back(detail::run_method(base, name, [&](ExperimentRecord& rec) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = std::string(name) == "gssp" ? gssp(w, spec.k, spec.lambda) : gshp(w, spec.k, spec.lambda);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        rec.metrics.emplace_back("distance_sq", res.distance_sq);
        rec.metrics.emplace_back("nnz", static_cast<double>(res.beta.nonzeros()));
        rec.timings.emplace_back("projection_ms", ms);
      }));
    }
    return out;
  };
  return detail::run_ordered(spec.ps.size() * runs, serial, task);
}

/// Median runtime ratio between consecutive p values, per method.
inline std::vector<MedianRow> bench_ratios(const std::vector<ExperimentRecord>& records) {
  const auto med = aggregate_median(records, "projection_ms");
  std::vector<MedianRow> out;
  for (std::size_t i = 0; i < med.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (med[j].method != med[i].method) continue;
      // Only the closest smaller p of the same method.
      bool closer = false;
      for (std::size_t l = 0; l < med.size(); ++l)
        closer |= med[l].method == med[i].method && med[l].grid_value < med[i].grid_value && med[l].grid_value > med[j].grid_value;
      if (!closer && med[j].grid_value < med[i].grid_value)
        out.push_back({med[i].method, med[i].grid_value, med[i].median / med[j].median, med[i].completed, med[i].failed});
    }
  }
  return out;
}

}  // namespace sparseproj
