#pragma once

// Sparse portfolio updates: k-sparse, sum-lambda adjustments recovered with
// GSHP-projected gradient, a hard-thresholding baseline that carries the
// budget constraint as an extra measurement row, and the Markowitz form.

#include "sparseproj/core.hpp"
#include "sparseproj/linops.hpp"
#include "sparseproj/projections.hpp"
#include "sparseproj/rng.hpp"
#include "sparseproj/solver.hpp"

#include <cmath>
#include <memory>
#include <optional>

namespace sparseproj {

struct PortfolioUpdateProblem {
  RealMatrix covariance;
  DenseVector expected_returns;
  double tradeoff = 0.0;  // tau: weight on the expected return
  DenseVector current;    // existing allocation
  std::size_t k = 1;      // transaction budget
  double lambda = 0.0;    // required change of the total allocation

  void validate() const {
    const auto p = covariance.rows();
    if (covariance.cols() != p || expected_returns.size() != p || current.size() != p)
      throw DomainError("PortfolioUpdateProblem: dimension mismatch");
    if ((covariance - covariance.transpose()).norm() > 1e-10 * std::max(covariance.norm(), 1.0))
      throw DomainError("PortfolioUpdateProblem: covariance is not symmetric");
  }
};

/// (b + delta)^T Sigma (b + delta) - tau mu^T (b + delta).
inline double markowitz_update_objective(const PortfolioUpdateProblem& problem, const DenseVector& delta) {
  problem.validate();
  if (delta.size() != problem.current.size()) throw DomainError("markowitz_update_objective: dimension mismatch");
  const DenseVector b = problem.current + delta;
  return b.dot(problem.covariance * b) - problem.tradeoff * problem.expected_returns.dot(b);
}

/// 2 Sigma (b + delta) - tau mu.
inline DenseVector markowitz_update_gradient(const PortfolioUpdateProblem& problem, const DenseVector& delta) {
  problem.validate();
  const DenseVector b = problem.current + delta;
  return 2.0 * problem.covariance * b - problem.tradeoff * problem.expected_returns;
}

/// Minimizes the Markowitz update objective over k-sparse delta with
/// sum(delta) = lambda by GSHP-projected gradient.
inline SolveResult<DenseVector> solve_markowitz_update(const PortfolioUpdateProblem& problem,
                                                       const SolverConfig& config) {
  problem.validate();
  // (b+d)^T S (b+d) - tau mu^T (b+d) = d^T S d - (tau mu - 2 S b)^T d + const.
  const DenseVector c = problem.tradeoff * problem.expected_returns - 2.0 * problem.covariance * problem.current;
  QuadraticFormLoss loss(problem.covariance, c);
  return minimize_projected<DenseVector>(loss, make_projector(ConstraintSpec::hyperplane_sparse(problem.k, problem.lambda)),
                                         config);
}

struct RegressionInstance {
  std::shared_ptr<const DenseMatrixOperator> design;  // m x p, unit-norm columns
  DenseVector beta_star;
  DenseVector y;
  double lambda = 0.0;
  std::size_t k = 0;
};

/// Column-normalized Gaussian design, k-sparse ground truth with sum lambda
/// (Gaussian values shifted onto the hyperplane), noiseless y. lambda is drawn
/// uniformly on [-1, 1] with |lambda| >= 1e-3 unless supplied.
inline RegressionInstance generate_regression_instance(std::size_t p, std::size_t m, std::size_t k,
                                                       std::uint64_t seed,
                                                       std::optional<double> lambda = std::nullopt) {
  if (k < 1 || k > p) throw DomainError("generate_regression_instance: k outside [1, p]");
  if (m < 1) throw DomainError("generate_regression_instance: m must be >= 1");
  Rng rng(seed);
  RegressionInstance inst;
  inst.k = k;
  if (lambda) {
    inst.lambda = *lambda;
  } else {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    do inst.lambda = unif(rng);
    while (std::abs(inst.lambda) < 1e-3);
  }
  const IndexSet support = sample_without_replacement(p, k, rng);
  DenseVector vals = gaussian_vector(static_cast<Eigen::Index>(k), rng);
  vals = project_hyperplane(vals, inst.lambda).beta;
  inst.beta_star = DenseVector::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < k; ++i) inst.beta_star[static_cast<Eigen::Index>(support[i])] = vals[static_cast<Eigen::Index>(i)];
  inst.design = std::make_shared<DenseMatrixOperator>(
      gaussian_matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p), true, rng()));
  inst.y = inst.design->apply(inst.beta_star);
  return inst;
}

inline double relative_error(const DenseVector& estimate, const DenseVector& truth) {
  const double n = truth.norm();
  return n > 0.0 ? (estimate - truth).norm() / n : (estimate - truth).norm();
}

/// Hard-thresholding baseline: minimizes ||[X; 1^T/sqrt(p)] beta - [y; lambda/sqrt(p)]||^2
/// over k-sparse beta (top-k magnitude projection). The budget constraint
/// only enters through the extra row, so it holds approximately.
inline SolveResult<DenseVector> solve_hyperplane_baseline(const RegressionInstance& inst,
                                                          const SolverConfig& config) {
  const auto p = inst.design->cols();
  const double root_p = std::sqrt(static_cast<double>(p));
  auto budget_row = std::make_shared<DenseMatrixOperator>(RealMatrix::Constant(1, p, 1.0 / root_p));
  const StackedOperator stacked({inst.design, budget_row});
  DenseVector target(inst.y.size() + 1);
  target << inst.y, inst.lambda / root_p;
  return solve_pgd<DenseVector>(stacked, target, make_projector(ConstraintSpec::sparsity_only(inst.k)), config);
}

/// GSHP-projected gradient on ||y - X beta||^2, warm-started from `warm`
/// (the baseline solution when absent).
inline SolveResult<DenseVector> solve_sparse_update(const RegressionInstance& inst, const SolverConfig& config,
                                                    std::optional<DenseVector> warm = std::nullopt,
                                                    const SolverConfig* baseline_config = nullptr) {
  if (!warm) warm = solve_hyperplane_baseline(inst, baseline_config ? *baseline_config : config).solution;
  SolverConfig cfg = config;
  cfg.init = InitKind::Warm;
  return solve_pgd<DenseVector>(*inst.design, inst.y,
                                make_projector(ConstraintSpec::hyperplane_sparse(inst.k, inst.lambda)), cfg, warm);
}

}  // namespace sparseproj
