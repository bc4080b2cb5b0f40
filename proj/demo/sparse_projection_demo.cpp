// Walks through the main entry points on small inputs.

#include "sparseproj/density.hpp"
#include "sparseproj/matrixproj.hpp"
#include "sparseproj/oracle.hpp"
#include "sparseproj/portfolio.hpp"
#include "sparseproj/projections.hpp"

#include <cstdio>

using namespace sparseproj;

static void print(const char* label, const ProjectionResult& r) {
  std::printf("%-28s beta = [", label);
  const DenseVector b = r.beta.to_dense();
  for (Eigen::Index i = 0; i < b.size(); ++i) std::printf("%s%.4g", i ? ", " : "", b[i]);
  std::printf("]  tau = %.4g  ||beta - w||^2 = %.4g\n", r.tau, r.distance_sq);
}

int main() {
  DenseVector w(4);
  w << 0.5, 0.4, 0.3, -0.2;
  print("gssp(w, k=2, lambda=1)", gssp(w, 2, 1.0));
  print("gshp(w, k=2, lambda=0)", gshp(w, 2, 0.0));
  print("simplex (convex)", project(w, ConstraintSpec::simplex_convex(1.0)));

  const auto oracle = oracle_project(w, ConstraintSpec::hyperplane_sparse(2, 0.0));
  std::printf("oracle distance for gshp case: %.4g after %llu supports\n\n", oracle.best_distance_sq,
              static_cast<unsigned long long>(oracle.enumerated));

  // Sparse recovery with a budget constraint.
  const auto inst = generate_regression_instance(200, 120, 10, 1);
  SolverConfig cfg;
  cfg.step = StepRule::fixed_over_norm_sq(1.0);
  const auto fit = solve_sparse_update(inst, cfg);
  std::printf("budget-constrained recovery: rel. error %.3g, %d iterations after the baseline warm start, sum %.6f (lambda %.6f)\n",
              relative_error(fit.solution, inst.beta_star), fit.trace.iteration_count(), fit.solution.sum(), inst.lambda);

  // Rank-2 density matrix from Pauli measurements.
  const int qubits = 4;
  const auto op = pauli_operator(qubits, 96, 2);
  const RealMatrix truth = random_density_matrix(16, 2, 3);
  SolverConfig qcfg;
  qcfg.step = StepRule::fixed_over_norm_sq(1.0);
  qcfg.tol = 1e-8;
  auto rank2 = [](const RealMatrix& x) { return project_rank_trace<double>(RealMatrix((x + x.transpose()) / 2), 2).matrix; };
  const auto state = solve_pgd<RealMatrix>(op, op.apply(truth), rank2, qcfg);
  std::printf("density matrix recovery (4 qubits, m=96): rel. error %.3g\n",
              (state.solution - truth).norm() / truth.norm());

  // Sparse kernel density estimate.
  const auto samples = sample_paper_mixture(300, 4);
  SolverConfig dcfg;
  dcfg.step = StepRule::fixed_over_norm_sq(1.0);
  const auto dens = estimate_density(samples, 1.0, ConstraintSpec::simplex_sparse(5, 1.0), dcfg);
  std::printf("5-sparse density estimate, centers:");
  for (auto i : dens.model.support()) std::printf(" %.2f(%.2f)", samples[i], dens.model.weights[static_cast<Eigen::Index>(i)]);
  std::printf("\n");
  return 0;
}
