// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include "sparseproj/harness.hpp"
#include "sparseproj/oracle.hpp"
#include "sparseproj/projections.hpp"
#include "sparseproj/solver.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

namespace sp = sparseproj;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

struct Instance {
  Eigen::VectorXd w;
  std::size_t k;
  double lambda;
  bool simplex;
};

// Every (distribution, p, k, lambda) combination, `reps` times each.
std::vector<Instance> oracle_instances(int reps) {
  using sp::testing::EntryDistribution;
  std::vector<Instance> out;
  std::mt19937_64 gen(20240601);
  const EntryDistribution dists[] = {EntryDistribution::Gaussian, EntryDistribution::Uniform,
                                     EntryDistribution::Integer, EntryDistribution::Duplicates};
  for (int rep = 0; rep < reps; ++rep)
    for (auto dist : dists)
      for (std::size_t p = 2; p <= 12; ++p)
        for (std::size_t k = 1; k <= std::min<std::size_t>(5, p); ++k) {
          for (double lambda : {0.0, 1.0, -1.0, 0.5, 10.0})
            out.push_back({sp::testing::draw_vector(p, dist, gen), k, lambda, false});
          for (double lambda : {1.0, 0.5, 10.0})
            out.push_back({sp::testing::draw_vector(p, dist, gen), k, lambda, true});
        }
  return out;
}

sp::ProjectionResult greedy(const Instance& in) {
  return in.simplex ? sp::gssp(in.w, in.k, in.lambda) : sp::gshp(in.w, in.k, in.lambda);
}

void criterion_oracle(const std::vector<Instance>& instances) {
  const auto t0 = Clock::now();
  int bad = 0, counted_simplex = 0;
  std::string first;
  for (const auto& in : instances) {
    counted_simplex += in.simplex;
    const auto g = greedy(in);
    const auto spec = in.simplex ? sp::ConstraintSpec::simplex_sparse(in.k, in.lambda)
                                 : sp::ConstraintSpec::hyperplane_sparse(in.k, in.lambda);
    const double lib = sp::oracle_project(in.w, spec).best_distance_sq;
    const double brute = sp::testing::brute_force_distance(in.w, in.k, in.lambda, in.simplex);
    const bool ok = std::abs(g.distance_sq - lib) <= 1e-9 * (1.0 + lib) &&
                    std::abs(g.distance_sq - brute) <= 1e-9 * (1.0 + brute) &&
                    std::abs((g.beta.to_dense() - in.w).squaredNorm() - g.distance_sq) <= 1e-9 * (1.0 + brute);
    if (!ok && bad++ == 0)
      first = std::string(in.simplex ? "gssp" : "gshp") + " p=" + std::to_string(in.w.size()) +
              " k=" + std::to_string(in.k) + " lambda=" + fmt(in.lambda) + " greedy=" + fmt(g.distance_sq) +
              " oracle=" + fmt(lib) + " brute=" + fmt(brute);
  }
  const double secs = seconds_since(t0);
  std::string detail = std::to_string(instances.size()) + " instances (" + std::to_string(counted_simplex) +
                       " simplex), " + std::to_string(bad) + " mismatches, " + fmt(secs) + " s";
  if (bad) detail += "; first: " + first;
  report(1, "oracle exactness", bad == 0 && instances.size() >= 2000 && secs < 60.0, detail);
}

double set_value(const Instance& in, const sp::IndexSet& s) {
  if (s.empty()) return 0.0;  // only reachable for the hyperplane with lambda = 0
  const sp::DenseVector w = in.w;
  return in.simplex ? sp::set_function_simplex(w, s, in.lambda) : sp::set_function_hyperplane(w, s, in.lambda);
}

void criterion_duality(const std::vector<Instance>& instances) {
  int bad_max = 0, bad_probe = 0;
  std::string first;
  for (const auto& in : instances) {
    const auto g = greedy(in);
    const double at_greedy = set_value(in, g.beta.support);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> cur;
    sp::testing::subsets(static_cast<std::size_t>(in.w.size()), in.k, 0, cur,
                         [&](const std::vector<std::size_t>& s) { best = std::max(best, set_value(in, s)); });
    if (!close(at_greedy, best, 1e-9) && bad_max++ == 0)
      first = "F(greedy support)=" + fmt(at_greedy) + " max F=" + fmt(best);
  }

  // Telescoping identity and single-element increment on random probes.
  std::mt19937_64 gen(77);
  std::normal_distribution<double> n(0.0, 1.0);
  const int probes = 1000;
  for (int t = 0; t < probes; ++t) {
    const std::size_t p = 2 + static_cast<std::size_t>(gen() % 11);
    const double lambda = 3.0 * n(gen);
    sp::DenseVector w(static_cast<Eigen::Index>(p));
    for (auto& x : w) x = t % 4 == 0 ? double(static_cast<int>(gen() % 7) - 3) : n(gen);

    const double direct = w.squaredNorm() - std::pow(w.sum() - lambda, 2) / static_cast<double>(p);
    if (!close(sp::telescoped_set_value(w, lambda), direct, 1e-9) && bad_probe++ == 0)
      first = "telescoped identity off at probe " + std::to_string(t);

    std::vector<std::size_t> perm(p);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    const std::size_t s_size = 1 + static_cast<std::size_t>(gen() % (p - 1));
    sp::IndexSet s(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s_size));
    const std::size_t i = perm[s_size];
    std::sort(s.begin(), s.end());
    sp::IndexSet grown = s;
    grown.insert(std::upper_bound(grown.begin(), grown.end(), i), i);
    const double diff = sp::set_function_hyperplane(w, grown, lambda) - sp::set_function_hyperplane(w, s, lambda);
    if (!close(sp::set_function_increment(w, s, i, lambda), diff, 1e-9) && bad_probe++ == 0)
      first = "increment formula off at probe " + std::to_string(t);
  }
  std::string detail = std::to_string(instances.size()) + " maximizer checks (" + std::to_string(bad_max) +
                       " off), " + std::to_string(probes) + " identity probes (" + std::to_string(bad_probe) + " off)";
  if (bad_max + bad_probe) detail += "; first: " + first;
  report(2, "set-function duality", bad_max == 0 && bad_probe == 0, detail);
}

template <typename Mat>
void check_matrix_instance(const Mat& w, std::size_t r, int& bad, std::string& first) {
  const auto proj = sp::project_rank_trace<typename Mat::Scalar>(w, r);
  Eigen::SelfAdjointEigenSolver<Mat> in(w, Eigen::EigenvaluesOnly);
  sp::DenseVector lam = in.eigenvalues().reverse();
  const double expected = sp::gssp(lam, r, 1.0).distance_sq;
  const double got = (proj.matrix - w).squaredNorm();
  Eigen::SelfAdjointEigenSolver<Mat> out(proj.matrix, Eigen::EigenvaluesOnly);
  const auto ev = out.eigenvalues();
  const auto positive = static_cast<std::size_t>((ev.array() > 1e-10).count());
  std::string why;
  if (!close(got, expected, 1e-9)) why = "distance " + fmt(got) + " vs " + fmt(expected);
  else if (ev.minCoeff() < -1e-10) why = "not PSD, min eigenvalue " + fmt(ev.minCoeff());
  else if (std::abs(std::real(proj.matrix.trace()) - 1.0) > 1e-10) why = "trace " + fmt(std::real(proj.matrix.trace()));
  else if (positive > r || proj.rank_used > r) why = "rank above r";
  if (!why.empty() && bad++ == 0) first = "d=" + std::to_string(w.rows()) + " r=" + std::to_string(r) + ": " + why;
}

void criterion_matrix() {
  std::mt19937_64 gen(31);
  int bad = 0, degenerate = 0;
  std::string first;
  const int total = 500;
  for (int t = 0; t < total; ++t) {
    const Eigen::Index d = 1 + t % 8;
    const std::size_t r = 1 + gen() % static_cast<std::size_t>(d);
    const bool complex = t % 2 == 0;
    if (t % 3 == 0) {
      // Degenerate spectrum: eigenvalues drawn from a pool of two values.
      ++degenerate;
      std::normal_distribution<double> n(0.0, 1.0);
      const double pool[] = {n(gen), n(gen)};
      sp::DenseVector v(d);
      for (auto& x : v) x = pool[gen() % 2];
      const Eigen::MatrixXcd q = sp::testing::random_unitary(d, gen);
      if (complex) {
        Eigen::MatrixXcd w = q * v.cast<std::complex<double>>().asDiagonal() * q.adjoint();
        w = (0.5 * (w + w.adjoint())).eval();
        check_matrix_instance(w, r, bad, first);
      } else {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(sp::testing::random_symmetric(d, gen));
        const Eigen::MatrixXd o = qr.householderQ();
        Eigen::MatrixXd w = o * v.asDiagonal() * o.transpose();
        w = (0.5 * (w + w.transpose())).eval();
        check_matrix_instance(w, r, bad, first);
      }
    } else if (complex) {
      check_matrix_instance(Eigen::MatrixXcd(sp::testing::random_hermitian(d, gen)), r, bad, first);
    } else {
      check_matrix_instance(Eigen::MatrixXd(sp::testing::random_symmetric(d, gen)), r, bad, first);
    }
  }
  std::string detail = std::to_string(total) + " matrices (" + std::to_string(degenerate) + " degenerate), " +
                       std::to_string(bad) + " failures";
  if (bad) detail += "; first: " + first;
  report(3, "matrix projector optimality", bad == 0, detail);
}

double median_or_nan(const std::vector<sp::MedianRow>& rows, const std::string& method, double g) {
  return sp::find_median(rows, method, g).value_or(std::numeric_limits<double>::quiet_NaN());
}

std::size_t count_failed(const std::vector<sp::ExperimentRecord>& recs) {
  return static_cast<std::size_t>(std::count_if(recs.begin(), recs.end(), [](const auto& r) { return !r.ok(); }));
}

void criteria_quantum() {
  using namespace sp::method;
  const auto t0 = Clock::now();
  sp::RunOptions opts;
  opts.master_seed = 1;
  const sp::QuantumSpec noisy_spec;
  const auto noisy = sp::run_quantum_experiment(noisy_spec, opts);
  sp::QuantumSpec clean_spec;
  clean_spec.snr_db = std::nullopt;
  clean_spec.grid = {4.0};
  clean_spec.methods = {nonconvex_random, nonconvex_convex_init};
  const auto clean = sp::run_quantum_experiment(clean_spec, opts);
  const double secs = seconds_since(t0);

  const auto noisy_rows = sp::aggregate_median(noisy, "rel_error");
  const auto clean_rows = sp::aggregate_median(clean, "rel_error");
  bool ok = count_failed(noisy) == 0 && count_failed(clean) == 0 && secs < 15 * 60;
  std::ostringstream detail;
  for (const auto& m : {nonconvex_random, nonconvex_convex_init}) {
    const double e = median_or_nan(clean_rows, m, 4.0);
    ok = ok && e < 1e-4;
    detail << "noiseless " << m << " at 4dr " << fmt(e) << "; ";
  }
  int orderings = 0, ordering_fails = 0;
  for (double g : noisy_spec.grid) {
    if (g < 2.8) continue;
    const double c1 = median_or_nan(noisy_rows, convex_bracketing, g);
    const double c2 = median_or_nan(noisy_rows, convex_traceball, g);
    for (const auto& m : {nonconvex_random, nonconvex_convex_init}) {
      ++orderings;
      const double e = median_or_nan(noisy_rows, m, g);
      if (!(e < c1 && e < c2)) {
        ++ordering_fails;
        detail << m << " not below convex at " << g << "dr (" << fmt(e) << " vs " << fmt(c1) << ", " << fmt(c2)
               << "); ";
      }
    }
  }
  ok = ok && ordering_fails == 0;
  detail << orderings - ordering_fails << "/" << orderings << " noisy orderings hold; ";
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (const auto& m : noisy_spec.methods) {
    const double ratio = median_or_nan(noisy_rows, m, 2.0) / median_or_nan(noisy_rows, m, 5.0);
    worst_ratio = std::min(worst_ratio, ratio);
    if (!(ratio >= 5.0)) ok = false;
  }
  detail << "min error(2dr)/error(5dr) " << fmt(worst_ratio) << "; " << fmt(secs) << " s";
  report(4, "quantum recovery", ok, detail.str());

  std::vector<double> nonconvex_ms, convex_ms;
  for (const auto& r : noisy) {
    const auto ms = r.metric("ms_per_iter");
    if (!r.ok() || !ms) continue;
    if (r.method == nonconvex_random) nonconvex_ms.push_back(*ms);
    if (r.method == convex_traceball) convex_ms.push_back(*ms);
  }
  if (nonconvex_ms.empty() || convex_ms.empty()) {
    report(5, "per-iteration cost ordering", false, "missing timings");
    return;
  }
  const double a = sp::median_of(nonconvex_ms), b = sp::median_of(convex_ms);
  report(5, "per-iteration cost ordering", a < b,
         "median ms/iter non-convex " + fmt(a) + " vs convex-2 " + fmt(b));
}

void criterion_density() {
  const auto t0 = Clock::now();
  const sp::DensitySpec spec;
  const auto recs = sp::run_density_experiment(spec);
  const double secs = seconds_since(t0);
  std::map<int, double> convex_ise, k5_ise;
  std::vector<double> ratios, mass15;
  double max_nnz5 = 0.0;
  for (const auto& r : recs) {
    if (!r.ok()) continue;
    if (r.method == "convex-qp") convex_ise[r.trial] = *r.metric("ise");
    if (r.method == "gssp" && r.grid_value == 5.0) {
      k5_ise[r.trial] = *r.metric("ise");
      max_nnz5 = std::max(max_nnz5, *r.metric("nnz"));
    }
    if (r.method == "gssp" && r.grid_value == 15.0) mass15.push_back(*r.metric("mass_outside_top"));
  }
  for (const auto& [t, e] : k5_ise)
    if (convex_ise.count(t)) ratios.push_back(e / convex_ise[t]);
  const bool complete = count_failed(recs) == 0 && ratios.size() == static_cast<std::size_t>(spec.trials) &&
                        mass15.size() == static_cast<std::size_t>(spec.trials);
  const double ratio = ratios.empty() ? NAN : sp::median_of(ratios);
  const double mass = mass15.empty() ? NAN : sp::median_of(mass15);
  const bool ok = complete && max_nnz5 <= 5.0 && ratio <= 2.0 && mass < 0.2 && secs < 300.0;
  report(6, "density estimation", ok,
         "k=5 max nnz " + fmt(max_nnz5) + ", median ISE(k=5)/ISE(convex) " + fmt(ratio) +
             ", k=15 median mass outside top 5 " + fmt(mass) + " (limit 0.2), " + fmt(secs) + " s");
}

void criterion_portfolio() {
  const auto t0 = Clock::now();
  const sp::PortfolioSpec spec;
  const auto recs = sp::run_portfolio_experiment(spec);
  const double secs = seconds_since(t0);
  int infeasible = 0, gshp_runs = 0;
  for (const auto& r : recs) {
    if (r.method != "gshp") continue;
    ++gshp_runs;
    if (!r.ok() || *r.metric("nnz") != static_cast<double>(spec.k) || !(*r.metric("sum_violation") <= 1e-8))
      ++infeasible;
  }
  const auto rows = sp::aggregate_median(recs, "rel_error");
  std::vector<double> grid = spec.grid;
  std::sort(grid.begin(), grid.end());
  std::ostringstream detail;
  bool ok = infeasible == 0 && count_failed(recs) == 0 && secs < 600.0;
  for (std::size_t i = 0; i < 2 && i < grid.size(); ++i) {
    const double g = median_or_nan(rows, "gshp", grid[i]), b = median_or_nan(rows, "baseline", grid[i]);
    ok = ok && g <= b;
    detail << "m/p=" << grid[i] << " gshp " << fmt(g) << " vs baseline " << fmt(b) << "; ";
  }
  auto gap = [&](double g) { return std::abs(median_or_nan(rows, "baseline", g) - median_or_nan(rows, "gshp", g)); };
  const double gap_small = gap(grid.front()), gap_large = gap(grid.back());
  ok = ok && gap_large <= gap_small;
  detail << "gap " << fmt(gap_large) << " at largest m vs " << fmt(gap_small) << " at smallest; " << infeasible
         << " of " << gshp_runs << " gshp runs infeasible; " << fmt(secs) << " s";
  report(7, "portfolio", ok, detail.str());
}

void criterion_hygiene() {
  int grad_bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index m = 5 + t % 40, p = 3 + (7 * t) % 60;
    const auto a = sp::gaussian_matrix(m, p, t % 2 == 0, 1000 + t);
    sp::Rng rng(5000 + t);
    const sp::DenseVector y = sp::gaussian_vector(m, rng);
    const sp::DenseVector beta = sp::gaussian_vector(p, rng);
    const double g = sp::gradient_check(a, y, beta, 1e-5, 20, t);
    worst = std::max(worst, g);
    grad_bad += !(g < 1e-6);
  }
  int monotone_bad = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index m = 10 + t % 30, p = 5 + (3 * t) % 50;
    const auto a = sp::gaussian_matrix(m, p, true, 2000 + t);
    sp::Rng rng(6000 + t);
    const sp::DenseVector y = sp::gaussian_vector(m, rng);
    const auto spec = t % 2 == 0 ? sp::ConstraintSpec::simplex_convex(0.5 + t % 3)
                                 : sp::ConstraintSpec::hyperplane_convex(t % 5 - 2.0);
    sp::SolverConfig cfg;
    cfg.step = sp::StepRule::fixed_over_norm_sq(t % 4 == 0 ? 1.9 : 1.0);
    cfg.max_iters = 500;
    cfg.init = sp::InitKind::Random;
    cfg.init_seed = static_cast<std::uint64_t>(t);
    const auto r = sp::solve_pgd(a, y, sp::make_projector(spec), cfg);
    const auto& its = r.trace.iterations;
    for (std::size_t i = 1; i < its.size(); ++i)
      if (its[i].objective > its[i - 1].objective + 1e-10 * (1.0 + its[i - 1].objective)) {
        ++monotone_bad;
        break;
      }
  }
  report(8, "numerical hygiene", grad_bad == 0 && monotone_bad == 0,
         "gradient check worst " + fmt(worst) + " over 100 instances (" + std::to_string(grad_bad) +
             " above 1e-6); " + std::to_string(monotone_bad) + " of 100 convex solves non-monotone");
}

void criterion_complexity() {
  sp::BenchSpec spec;
  spec.ps = {100000, 1000000};
  const auto recs = sp::run_projection_bench(spec);
  const auto ratios = sp::bench_ratios(recs);
  bool ok = ratios.size() == 2 && count_failed(recs) == 0;
  std::ostringstream detail;
  for (const auto& r : ratios) {
    ok = ok && r.median <= 15.0;
    detail << r.method << " time(1e6)/time(1e5) " << fmt(r.median) << "; ";
  }
  report(9, "complexity", ok, detail.str());
}

void criterion_determinism() {
  sp::RunOptions a, b;
  a.timing = b.timing = false;
  a.master_seed = b.master_seed = 99;
  a.threads = 1;
  b.threads = 3;
  std::vector<std::string> mismatched;
  auto check = [&](const std::string& name, auto run) {
    if (sp::records_to_jsonl(run(a), false) != sp::records_to_jsonl(run(b), false)) mismatched.push_back(name);
  };

  sp::QuantumSpec q;
  q.qubits = 4;
  q.trials = 2;
  q.grid = {3.0, 5.0};
  q.max_iters = 300;
  check("quantum", [&](const sp::RunOptions& o) { return sp::run_quantum_experiment(q, o); });
  sp::DensitySpec d;
  d.samples = 200;
  d.trials = 2;
  d.max_iters = 300;
  check("density", [&](const sp::RunOptions& o) { return sp::run_density_experiment(d, o); });
  sp::PortfolioSpec p;
  p.p = 100;
  p.k = 10;
  p.trials = 3;
  check("portfolio", [&](const sp::RunOptions& o) { return sp::run_portfolio_experiment(p, o); });
  sp::BenchSpec bs;
  bs.ps = {1000, 5000};
  bs.k = 20;
  bs.runs = 3;
  check("bench", [&](const sp::RunOptions& o) { return sp::run_projection_bench(bs, o); });

  std::string detail = "quantum, density, portfolio, bench rerun with the same seed";
  if (!mismatched.empty()) {
    detail += "; differing:";
    for (const auto& m : mismatched) detail += " " + m;
  }
  report(10, "determinism", mismatched.empty(), detail);
}

}  // namespace

int main() {
  try {
    const auto instances = oracle_instances(2);
    criterion_oracle(instances);
    criterion_duality(instances);
    criterion_matrix();
    criteria_quantum();
    criterion_density();
    criterion_portfolio();
    criterion_hygiene();
    criterion_complexity();
    criterion_determinism();
  } catch (const std::exception& e) {
    std::printf("FAIL aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
