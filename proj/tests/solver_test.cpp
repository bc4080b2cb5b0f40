#include "sparseproj/solver.hpp"

#include "sparseproj/projections.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace sparseproj {
namespace {

SolverConfig config_with(StepRule step, int max_iters = 3000, double tol = 1e-5) {
  SolverConfig c;
  c.step = step;
  c.max_iters = max_iters;
  c.tol = tol;
  return c;
}

TEST(StepRules, Values) {
  const IdentityOperator id(3);
  LeastSquaresLoss<DenseVector, IdentityOperator> loss(id, DenseVector::Zero(3));
  EXPECT_NEAR(step_size(StepRule::fixed_over_norm_sq(), loss), 1.5, 1e-8);
  EXPECT_NEAR(step_size(StepRule::fixed_over_norm_sq(1.0), loss), 0.5, 1e-8);
  EXPECT_DOUBLE_EQ(step_size(StepRule::fixed(0.1), loss), 0.1);
  EXPECT_DOUBLE_EQ(step_size(StepRule::rip_motivated(0.25), loss), 0.4);
  LeastSquaresLoss<DenseVector, IdentityOperator> given(id, DenseVector::Zero(3), 4.0);
  EXPECT_DOUBLE_EQ(step_size(StepRule::fixed_over_norm_sq(2.0), given), 0.25);
}

TEST(SolverConfig, Validation) {
  EXPECT_THROW(config_with(StepRule::fixed(0.0)).validate(), DomainError);
  EXPECT_THROW(config_with(StepRule::fixed_over_norm_sq(-1.0)).validate(), DomainError);
  EXPECT_THROW(config_with(StepRule::rip_motivated(-1.0)).validate(), DomainError);
  EXPECT_THROW(config_with(StepRule::fixed(0.1), 0).validate(), DomainError);
  EXPECT_THROW(config_with(StepRule::fixed(0.1), 10, 0.0).validate(), DomainError);
  EXPECT_NO_THROW(config_with(StepRule::rip_motivated(0.0)).validate());
}

TEST(SolvePgd, IdentityWithFeasibleTargetConvergesImmediately) {
  const IdentityOperator id(5);
  DenseVector y = DenseVector::Zero(5);
  y[1] = 0.25;
  y[3] = 0.75;
  const auto r = solve_pgd(id, y, make_projector(ConstraintSpec::simplex_sparse(2, 1.0)),
                           config_with(StepRule::rip_motivated(0.0)));
  EXPECT_LE(r.trace.iteration_count(), 2);
  EXPECT_EQ(r.trace.status, SolveStatus::Converged);
  EXPECT_LE((r.solution - y).norm(), 1e-12);
}

TEST(SolvePgd, FullSparsityLeastSquaresMatchesDirectSolve) {
  const auto a = gaussian_matrix(30, 30, false, 3);
  Rng rng(4);
  const DenseVector y = gaussian_vector(30, rng);
  auto cfg = config_with(StepRule::fixed_over_norm_sq(1.0), 200000, 1e-14);
  const auto r = solve_pgd(a, y, make_projector(ConstraintSpec::sparsity_only(30)), cfg);
  const DenseVector direct = a.matrix().fullPivLu().solve(y);
  EXPECT_LE(r.trace.final_objective(), 1e-8 * y.squaredNorm());
  EXPECT_LE((r.solution - direct).norm(), 1e-3 * direct.norm());
}

TEST(SolvePgd, RecoversSparseSimplexVectorInRipRegime) {
  const std::size_t p = 200, k = 5;
  const auto m = static_cast<Eigen::Index>(std::ceil(4.0 * k * std::log(double(p) / k)));
  std::vector<double> errors;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const RealMatrix g = gaussian_matrix_entries(m, p, rng) / std::sqrt(static_cast<double>(m));
    const DenseMatrixOperator a(g);
    DenseVector truth = DenseVector::Zero(p);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (auto i : sample_without_replacement(p, k, rng)) truth[static_cast<Eigen::Index>(i)] = u(rng);
    truth /= truth.sum();
    const auto r = solve_pgd(a, a.apply(truth), make_projector(ConstraintSpec::simplex_sparse(k, 1.0)),
                             config_with(StepRule::rip_motivated(0.0), 3000, 1e-10));
    errors.push_back((r.solution - truth).norm() / truth.norm());
  }
  std::nth_element(errors.begin(), errors.begin() + 10, errors.end());
  EXPECT_LT(errors[10], 1e-4);
}

TEST(SolvePgd, EveryIterateFeasibleAndTraceBounded) {
  const auto a = gaussian_matrix(15, 40, true, 8);
  Rng rng(9);
  const DenseVector y = gaussian_vector(15, rng);
  const std::size_t k = 4;
  const double lambda = -0.5;
  std::vector<DenseVector> seen;
  auto proj = [&](const DenseVector& w) {
    DenseVector out = gshp(w, k, lambda).beta.to_dense();
    seen.push_back(out);
    return out;
  };
  auto cfg = config_with(StepRule::fixed_over_norm_sq(1.0), 50);
  const auto r = solve_pgd(a, y, proj, cfg);
  EXPECT_LE(r.trace.iterations.size(), 51u);
  for (const auto& x : seen) {
    EXPECT_NEAR(x.sum(), lambda, 1e-10);
    EXPECT_LE(std::count_if(x.data(), x.data() + x.size(), [](double v) { return v != 0.0; }), 4);
  }
  for (const auto& rec : r.trace.iterations) EXPECT_LE(rec.support.size(), k);
}

TEST(SolvePgd, ConvexProjectorsGiveMonotoneObjective) {
  for (auto spec : {ConstraintSpec::simplex_convex(2.0), ConstraintSpec::hyperplane_convex(-1.0)}) {
    const auto a = gaussian_matrix(20, 30, true, 12);
    Rng rng(13);
    const DenseVector y = gaussian_vector(20, rng);
    const auto r = solve_pgd(a, y, make_projector(spec), config_with(StepRule::fixed_over_norm_sq(1.0), 500));
    for (std::size_t i = 1; i < r.trace.iterations.size(); ++i)
      EXPECT_LE(r.trace.iterations[i].objective, r.trace.iterations[i - 1].objective + 1e-10);
  }
}

TEST(SolvePgd, NonConvexFinalIterateIsFixedPoint) {
  const auto a = gaussian_matrix(40, 60, true, 21);
  Rng rng(22);
  const DenseVector y = gaussian_vector(40, rng);
  const auto proj = make_projector(ConstraintSpec::hyperplane_sparse(5, 0.7));
  const auto cfg = config_with(StepRule::fixed_over_norm_sq(1.0));
  const auto r = solve_pgd(a, y, proj, cfg);
  ASSERT_EQ(r.trace.status, SolveStatus::Converged);
  LeastSquaresLoss<DenseVector, DenseMatrixOperator> loss(a, y);
  EXPECT_LT(fixed_point_residual(loss, proj, r.solution, r.trace.step), cfg.tol);
}

TEST(SolvePgd, PermutingColumnsPermutesSolution) {
  const auto a = gaussian_matrix(25, 12, true, 31);
  Rng rng(32);
  const DenseVector y = gaussian_vector(25, rng);
  IndexSet perm(12);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  RealMatrix pa(25, 12);
  for (std::size_t j = 0; j < 12; ++j) pa.col(static_cast<Eigen::Index>(j)) = a.matrix().col(static_cast<Eigen::Index>(perm[j]));
  const auto proj = make_projector(ConstraintSpec::simplex_sparse(3, 1.0));
  // Summation order differs after permuting, so compare converged solutions.
  const auto cfg = config_with(StepRule::fixed(0.2), 20000, 1e-13);
  const DenseVector x = solve_pgd(a, y, proj, cfg).solution;
  const DenseVector px = solve_pgd(DenseMatrixOperator(pa), y, proj, cfg).solution;
  for (std::size_t j = 0; j < 12; ++j)
    EXPECT_NEAR(px[static_cast<Eigen::Index>(j)], x[static_cast<Eigen::Index>(perm[j])], 1e-9);
}

TEST(SolvePgd, WarmStartIsProjectedFirst) {
  const IdentityOperator id(4);
  DenseVector warm(4);
  warm << 5, -1, 2, 0;
  auto cfg = config_with(StepRule::fixed(1e-9), 1);
  cfg.init = InitKind::Warm;
  const auto r = solve_pgd(id, DenseVector::Zero(4), make_projector(ConstraintSpec::simplex_sparse(2, 1.0)), cfg,
                           std::optional<DenseVector>(warm));
  EXPECT_TRUE(r.trace.iterations.front().support == (IndexSet{0}));
  EXPECT_NEAR(r.solution.sum(), 1.0, 1e-12);
  cfg.init = InitKind::Warm;
  EXPECT_THROW(solve_pgd(id, DenseVector::Zero(4), make_projector(ConstraintSpec::simplex_sparse(2, 1.0)), cfg),
               DomainError);
}

TEST(SolvePgd, RandomInitIsSeeded) {
  const auto a = gaussian_matrix(10, 20, true, 1);
  const DenseVector y = DenseVector::Ones(10);
  auto cfg = config_with(StepRule::fixed_over_norm_sq(1.0), 5);
  cfg.init = InitKind::Random;
  cfg.init_seed = 77;
  const auto proj = make_projector(ConstraintSpec::hyperplane_sparse(3, 0.0));
  EXPECT_EQ(solve_pgd(a, y, proj, cfg).solution, solve_pgd(a, y, proj, cfg).solution);
}

TEST(SolvePgd, NonFiniteAborts) {
  const IdentityOperator id(3);
  auto cfg = config_with(StepRule::fixed(1e308), 10);
  cfg.init = InitKind::Warm;
  EXPECT_THROW(solve_pgd(id, DenseVector::Constant(3, 1e308), make_projector(ConstraintSpec::sparsity_only(3)), cfg,
                         std::optional<DenseVector>(DenseVector::Constant(3, -1e308))),
               SolverError);
}

TEST(SolvePgd, NesterovReachesSameConvexOptimum) {
  // Badly scaled columns and an interior optimum: plain steps crawl.
  Rng rng(41);
  RealMatrix g = gaussian_matrix_entries(60, 30, rng);
  for (Eigen::Index j = 0; j < 30; ++j) g.col(j) *= 0.05 + 0.95 * static_cast<double>(j) / 29.0;
  const DenseMatrixOperator a(g);
  const DenseVector y = a.apply(DenseVector::Constant(30, 1.0 / 6.0)) + 0.01 * gaussian_vector(60, rng);
  const auto proj = make_projector(ConstraintSpec::simplex_convex(5.0));
  auto cfg = config_with(StepRule::fixed_over_norm_sq(1.0), 20000, 1e-12);
  const auto plain = solve_pgd(a, y, proj, cfg);
  cfg.momentum = Momentum::Nesterov;
  const auto fast = solve_pgd(a, y, proj, cfg);
  EXPECT_NEAR(fast.trace.final_objective(), plain.trace.final_objective(), 1e-8 * (1.0 + plain.trace.final_objective()));
  EXPECT_LT(fast.trace.iteration_count(), plain.trace.iteration_count());
}

TEST(QuadraticForm, MinimizesOverSimplex) {
  RealMatrix q = RealMatrix::Identity(3, 3);
  DenseVector c(3);
  c << 2, 0, 0;
  QuadraticFormLoss loss(q, c);
  EXPECT_DOUBLE_EQ(loss.curvature(), 1.0);
  auto cfg = config_with(StepRule::fixed(0.5), 100);
  const auto r = minimize_projected<DenseVector>(loss, make_projector(ConstraintSpec::simplex_convex(1.0)), cfg);
  EXPECT_NEAR(r.solution[0], 1.0, 1e-12);
  EXPECT_THROW(QuadraticFormLoss(RealMatrix::Identity(2, 2), DenseVector::Zero(3)), DomainError);
}

TEST(GradientCheck, SmallInstance) {
  const auto a = gaussian_matrix(8, 6, false, 50);
  Rng rng(51);
  const DenseVector y = gaussian_vector(8, rng);
  const DenseVector beta = gaussian_vector(6, rng);
  EXPECT_LT(gradient_check(a, y, beta, 1e-5), 1e-6);
  // Quadratic: central differences are exact up to roundoff for any h.
  EXPECT_LT(gradient_check(a, y, beta, 1.0), 1e-9);
  EXPECT_THROW(gradient_check(a, y, beta, 0.0), DomainError);
}

TEST(GradientCheck, VanishesAtUnconstrainedMinimizer) {
  const auto a = gaussian_matrix(12, 5, false, 60);
  Rng rng(61);
  const DenseVector y = gaussian_vector(12, rng);
  const DenseVector beta = a.matrix().colPivHouseholderQr().solve(y);
  LeastSquaresLoss<DenseVector, DenseMatrixOperator> loss(a, y);
  EXPECT_LT(loss.value_and_gradient(beta).second.norm(), 1e-10);
}

TEST(GradientCheck, ProbesSubsetOnLargeInputs) {
  const auto a = gaussian_matrix(10, 100, false, 70);
  Rng rng(71);
  EXPECT_LT(gradient_check(a, gaussian_vector(10, rng), gaussian_vector(100, rng), 1e-4, 10), 1e-6);
}

}  // namespace
}  // namespace sparseproj
