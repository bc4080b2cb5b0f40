#pragma once

// Randomized greedy-vs-oracle equivalence suite for the sparse simplex and
// hyperplane projectors, with replaceable projector implementations so a
// deliberately broken one can be checked for detection.

#include "sparseproj/oracle.hpp"
#include "sparseproj/projections.hpp"
#include "sparseproj/rng.hpp"

#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace sparseproj {

enum class EntryDistribution { Gaussian, Uniform, Integer, DuplicateHeavy };

inline const char* to_string(EntryDistribution d) {
  switch (d) {
    case EntryDistribution::Gaussian: return "gaussian";
    case EntryDistribution::Uniform: return "uniform";
    case EntryDistribution::Integer: return "integer";
    case EntryDistribution::DuplicateHeavy: return "duplicate-heavy";
  }
  return "unknown";
}

/// Integer entries in [-3, 3]; duplicate-heavy entries reuse two or three
/// distinct Gaussian values.
inline DenseVector draw_entries(std::size_t p, EntryDistribution dist, Rng& rng) {
  DenseVector w(static_cast<Eigen::Index>(p));
  switch (dist) {
    case EntryDistribution::Gaussian: {
      std::normal_distribution<double> n(0.0, 1.0);
      for (auto& x : w) x = n(rng);
      break;
    }
    case EntryDistribution::Uniform: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (auto& x : w) x = u(rng);
      break;
    }
    case EntryDistribution::Integer: {
      std::uniform_int_distribution<int> u(-3, 3);
      for (auto& x : w) x = u(rng);
      break;
    }
    case EntryDistribution::DuplicateHeavy: {
      std::normal_distribution<double> n(0.0, 1.0);
      std::uniform_int_distribution<int> count(2, 3);
      std::vector<double> pool(static_cast<std::size_t>(count(rng)));
      for (auto& v : pool) v = n(rng);
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      for (auto& x : w) x = pool[pick(rng)];
      break;
    }
  }
  return w;
}

struct OracleInstance {
  DenseVector w;
  std::size_t k = 1;
  double lambda = 0.0;
  EntryDistribution dist = EntryDistribution::Gaussian;
};

/// p in [2, 12], k in [1, min(5, p)], lambda from {0, 1, -1, 0.5, 10};
/// `simplex` restricts lambda to the positive values.
inline OracleInstance random_oracle_instance(Rng& rng, bool simplex) {
  static constexpr double all_lambdas[] = {0.0, 1.0, -1.0, 0.5, 10.0};
  static constexpr double positive_lambdas[] = {1.0, 0.5, 10.0};
  OracleInstance inst;
  std::uniform_int_distribution<std::size_t> pd(2, 12);
  const std::size_t p = pd(rng);
  std::uniform_int_distribution<std::size_t> kd(1, std::min<std::size_t>(5, p));
  inst.k = kd(rng);
  std::uniform_int_distribution<int> dd(0, 3);
  inst.dist = static_cast<EntryDistribution>(dd(rng));
  if (simplex) {
    std::uniform_int_distribution<std::size_t> ld(0, 2);
    inst.lambda = positive_lambdas[ld(rng)];
  } else {
    std::uniform_int_distribution<std::size_t> ld(0, 4);
    inst.lambda = all_lambdas[ld(rng)];
  }
  inst.w = draw_entries(p, inst.dist, rng);
  return inst;
}

using GreedyProjector = std::function<ProjectionResult(const DenseVector&, std::size_t, double)>;

struct OracleSuiteOptions {
  int trials = 2000;  // instances per projector
  std::uint64_t seed = 0;
  double rel_tol = 1e-9;
  GreedyProjector simplex = [](const DenseVector& w, std::size_t k, double l) { return gssp(w, k, l); };
  GreedyProjector hyperplane = [](const DenseVector& w, std::size_t k, double l) { return gshp(w, k, l); };
};

struct PropertyOutcome {
  std::string name;
  int checked = 0;
  int failures = 0;
  std::string counterexample;  // first failure only
  bool passed() const { return failures == 0; }
};

inline std::string describe_instance(const OracleInstance& inst) {
  std::ostringstream os;
  os.precision(17);
  os << "w=[";
  for (Eigen::Index i = 0; i < inst.w.size(); ++i) os << (i ? ", " : "") << inst.w[i];
  os << "] k=" << inst.k << " lambda=" << inst.lambda << " (" << to_string(inst.dist) << ")";
  return os.str();
}

/// Per projector: distance equals the oracle optimum, and the output is
/// feasible with a truthful distance_sq.
inline std::vector<PropertyOutcome> run_oracle_suite(const OracleSuiteOptions& opts) {
  std::vector<PropertyOutcome> out;
  for (const bool simplex : {true, false}) {
    const std::string tag = simplex ? "gssp" : "gshp";
    PropertyOutcome optimal{tag + " distance equals oracle"};
    PropertyOutcome feasible{tag + " output feasible"};
    Rng rng(derive_seed(opts.seed, "selftest", {simplex ? 0u : 1u}));
    const auto& greedy = simplex ? opts.simplex : opts.hyperplane;
    for (int t = 0; t < opts.trials; ++t) {
      const auto inst = random_oracle_instance(rng, simplex);
      const auto spec = simplex ? ConstraintSpec::simplex_sparse(inst.k, inst.lambda)
                                : ConstraintSpec::hyperplane_sparse(inst.k, inst.lambda);
      const auto g = greedy(inst.w, inst.k, inst.lambda);
      const auto o = oracle_project(inst.w, spec);

      ++optimal.checked;
      if (!(std::abs(g.distance_sq - o.best_distance_sq) <= opts.rel_tol * (1.0 + o.best_distance_sq))) {
        if (optimal.failures++ == 0) {
          std::ostringstream os;
          os.precision(17);
          os << describe_instance(inst) << " greedy distance^2=" << g.distance_sq
             << " oracle distance^2=" << o.best_distance_sq;
          optimal.counterexample = os.str();
        }
      }

      ++feasible.checked;
      std::string why;
      const DenseVector beta = g.beta.to_dense();
      if (beta.size() != inst.w.size()) why = "wrong dimension";
      else if (g.beta.nonzeros() > inst.k) why = "more than k nonzeros";
      else if (std::abs(beta.sum() - inst.lambda) > opts.rel_tol * (1.0 + std::abs(inst.lambda))) why = "sum differs from lambda";
      else if (simplex && beta.minCoeff() < 0.0) why = "negative entry";
      else if (std::abs((beta - inst.w).squaredNorm() - g.distance_sq) > opts.rel_tol * (1.0 + g.distance_sq))
        why = "reported distance_sq is not ||beta - w||^2";
      if (!why.empty() && feasible.failures++ == 0) feasible.counterexample = describe_instance(inst) + ": " + why;
    }
    out.push_back(optimal);
    out.push_back(feasible);
  }
  return out;
}

}  // namespace sparseproj
