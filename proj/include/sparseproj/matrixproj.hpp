#pragma once

// Spectral projectors for Hermitian matrices: the rank-r / unit-trace PSD
// projector (GSSP on the eigenvalues) and the convex baselines used in
// quantum state tomography.

#include "sparseproj/core.hpp"
#include "sparseproj/linops.hpp"
#include "sparseproj/projections.hpp"
#include "sparseproj/solver.hpp"

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#ifdef SPARSEPROJ_WITH_LAPACK
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>
#endif

namespace sparseproj {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

#ifdef SPARSEPROJ_WITH_LAPACK
using EigIndex = lapack_int;
#else
using EigIndex = Eigen::Index;
#endif

template <typename Scalar>
struct DensityMatrixEstimate {
  Matrix<Scalar> matrix;
  std::size_t rank_used = 0;
  std::vector<double> eigenvalues;  // retained (nonzero) eigenvalues, descending
  double trace = 0.0;
};

/// Eigenpairs in descending eigenvalue order.
template <typename Scalar>
struct SpectralDecomposition {
  DenseVector values;
  Matrix<Scalar> vectors;
};

template <typename Scalar>
void require_hermitian(const Matrix<Scalar>& w, const char* what) {
  if (w.rows() != w.cols() || w.rows() == 0) throw DomainError(std::string(what) + ": matrix must be square");
  if (!w.allFinite()) throw DomainError(std::string(what) + ": non-finite entries");
  const double scale = w.norm();
  if ((w - w.adjoint()).norm() > 1e-10 * std::max(scale, 1e-300) && scale > 0.0)
    throw DomainError(std::string(what) + ": matrix is not Hermitian");
}

/// Leading `top` eigenpairs (all when top == 0), descending. With LAPACK the
/// partial case runs MRRR on an index range, so only the requested pairs are
/// computed.
template <typename Scalar>
SpectralDecomposition<Scalar> descending_eigen(const Matrix<Scalar>& w, std::size_t top = 0) {
  const auto d = static_cast<EigIndex>(w.rows());
  const auto count = (top == 0 || top > static_cast<std::size_t>(d)) ? d : static_cast<EigIndex>(top);
  SpectralDecomposition<Scalar> out;
#ifdef SPARSEPROJ_WITH_LAPACK
  if (d == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  Matrix<Scalar> a = w;
  DenseVector ev(d);
  Matrix<Scalar> z(d, count);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(count));
  lapack_int found = 0;
  const char range = count == d ? 'A' : 'I';
  lapack_int info;
  if constexpr (std::is_same_v<Scalar, double>) {
    info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', range, 'L', d, a.data(), d, 0.0, 0.0, d - count + 1, d, 0.0, &found,
                          ev.data(), z.data(), d, isuppz.data());
  } else {
    info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', range, 'L', d, a.data(), d, 0.0, 0.0, d - count + 1, d, 0.0, &found,
                          ev.data(), z.data(), d, isuppz.data());
  }
  if (info != 0 || found != count) throw DomainError("eigendecomposition failed");
  out.values = ev.head(count).reverse();
  out.vectors = z.rowwise().reverse();
#else
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(w);
  if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
  out.values = es.eigenvalues().reverse().head(count);
  out.vectors = es.eigenvectors().rowwise().reverse().leftCols(count);
#endif
  return out;
}

/// U diag(v) U^H using only the columns listed in `cols`.
template <typename Scalar>
Matrix<Scalar> reconstruct(const Matrix<Scalar>& u, const IndexSet& cols, const std::vector<double>& v) {
  Matrix<Scalar> us(u.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) us.col(static_cast<Eigen::Index>(j)) = u.col(static_cast<Eigen::Index>(cols[j])) * v[j];
  Matrix<Scalar> usel(u.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) usel.col(static_cast<Eigen::Index>(j)) = u.col(static_cast<Eigen::Index>(cols[j]));
  return us * usel.adjoint();
}

/// argmin ||B - W||_F over B PSD, rank(B) <= r, tr(B) = 1: GSSP (k = r,
/// lambda = 1) on the eigenvalues, eigenvectors kept. Ties among equal
/// eigenvalues go to the first in descending order.
template <typename Scalar>
DensityMatrixEstimate<Scalar> project_rank_trace(const Matrix<Scalar>& w, std::size_t r) {
  require_hermitian(w, "project_rank_trace");
  const auto d = static_cast<std::size_t>(w.rows());
  if (r < 1 || r > d) throw DomainError("project_rank_trace: r outside [1, d]");
  // Only the r largest eigenvalues can survive the top-r selection.
  const auto eig = descending_eigen(w, r);
  const auto proj = gssp(eig.values, r, 1.0);

  DensityMatrixEstimate<Scalar> out;
  IndexSet cols;
  for (std::size_t i = 0; i < proj.beta.support.size(); ++i) {
    if (proj.beta.values[i] > 0.0) {
      cols.push_back(proj.beta.support[i]);
      out.eigenvalues.push_back(proj.beta.values[i]);
    }
  }
  out.matrix = reconstruct(eig.vectors, cols, out.eigenvalues);
  out.rank_used = cols.size();
  for (double v : out.eigenvalues) out.trace += v;
  return out;
}

/// Projection onto {X PSD, tr(X) <= 1}: clip the spectrum at zero and, if the
/// clipped trace exceeds one, project it onto the unit simplex.
template <typename Scalar>
Matrix<Scalar> project_psd_traceball(const Matrix<Scalar>& w) {
  require_hermitian(w, "project_psd_traceball");
  const auto eig = descending_eigen(w);
  DenseVector v = eig.values.cwiseMax(0.0);
  if (v.sum() > 1.0) v = project_simplex(eig.values, 1.0).beta;
  IndexSet cols;
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) {
      cols.push_back(static_cast<std::size_t>(i));
      vals.push_back(v[i]);
    }
  }
  return reconstruct(eig.vectors, cols, vals);
}

/// Proximal map of t * tr(X) + indicator(X PSD): eigenvalues v -> [v - t]_+.
template <typename Scalar>
Matrix<Scalar> prox_nuclear_psd(const Matrix<Scalar>& w, double t) {
  require_hermitian(w, "prox_nuclear_psd");
  if (!(t > 0.0)) throw DomainError("prox_nuclear_psd: t must be > 0");
  const auto eig = descending_eigen(w);
  IndexSet cols;
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double v = eig.values[i] - t;
    if (v > 0.0) {
      cols.push_back(static_cast<std::size_t>(i));
      vals.push_back(v);
    }
  }
  return reconstruct(eig.vectors, cols, vals);
}

/// Clips the spectrum of a Hermitian matrix at zero.
template <typename Scalar>
Matrix<Scalar> project_psd_cone(const Matrix<Scalar>& w) {
  const auto eig = descending_eigen(w);
  IndexSet cols;
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] > 0.0) {
      cols.push_back(static_cast<std::size_t>(i));
      vals.push_back(eig.values[i]);
    }
  }
  return reconstruct(eig.vectors, cols, vals);
}

/// Number of eigenvalues above rel_tol times the largest one (0 for a
/// matrix without positive eigenvalues).
template <typename Scalar>
std::size_t numerical_rank(const Matrix<Scalar>& x, double rel_tol = 1e-6) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(x, Eigen::EigenvaluesOnly);
  const DenseVector v = es.eigenvalues();
  const double top = v.maxCoeff();
  if (!(top > 0.0)) return 0;
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) n += v[i] > rel_tol * top;
  return n;
}

/// X* = G G^T / tr(G G^T) with G a d x r standard Gaussian matrix.
inline RealMatrix random_density_matrix(Eigen::Index d, Eigen::Index r, std::uint64_t seed) {
  Rng rng(seed);
  const RealMatrix g = gaussian_matrix_entries(d, r, rng);
  RealMatrix x = g * g.transpose();
  return x / x.trace();
}

struct BracketingOptions {
  int grid_points = 20;        // geometric grid over ||A^T y|| * [1e-4, 1]
  int bisection_steps = 6;
  double rank_tol = 1e-6;      // relative eigenvalue threshold for numerical rank
};

template <typename Scalar>
struct BracketingResult {
  DensityMatrixEstimate<Scalar> estimate;
  double lambda = 0.0;
  bool found = false;          // false: no lambda reached rank r, nearest rank returned
  int solves = 0;
  int total_iterations = 0;
  double seconds = 0.0;
  std::vector<std::pair<double, std::size_t>> probes;  // (lambda, numerical rank) in visit order
};

/// Solves min ||A(X) - y||^2 + lambda tr(X) over X PSD by proximal gradient
/// for one lambda.
template <typename Scalar, typename Op>
SolveResult<Matrix<Scalar>> solve_nuclear_psd(const Op& op, const DenseVector& y, double lambda,
                                              const SolverConfig& config,
                                              const std::optional<Matrix<Scalar>>& warm = std::nullopt,
                                              std::optional<double> norm_sq = std::nullopt) {
  using M = Matrix<Scalar>;
  LeastSquaresLoss<M, Op> loss(op, y, norm_sq);
  const double mu = step_size(config.step, loss);
  auto prox = [&](const M& w) -> M {
    const M sym = (w + w.adjoint()) / 2.0;
    return lambda > 0.0 ? prox_nuclear_psd(sym, mu * lambda) : project_psd_cone(sym);
  };
  return minimize_projected<M>(loss, prox, config, warm);
}

/// Tunes lambda so the trace-regularized PSD least-squares solution has
/// numerical rank r, then rescales it to unit trace. The geometric grid is
/// scanned from small to large lambda (rank is non-increasing in lambda); the
/// first grid point with rank <= r is bracketed against its predecessor and
/// refined by bisection toward the smallest lambda that still yields rank r.
template <typename Scalar, typename Op>
BracketingResult<Scalar> lambda_bracketing_solve(const Op& op, const DenseVector& y, std::size_t r,
                                                 const SolverConfig& config,
                                                 const BracketingOptions& options = {},
                                                 std::optional<double> norm_sq = std::nullopt) {
  using M = Matrix<Scalar>;
  if (r < 1) throw DomainError("lambda_bracketing_solve: r must be >= 1");
  if (options.grid_points < 2) throw DomainError("lambda_bracketing_solve: need >= 2 grid points");
  const auto t0 = std::chrono::steady_clock::now();
  if (!norm_sq) {
    const double n = operator_norm<M>(op, 500, 0x5eed);
    norm_sq = n * n;
  }
  const double scale = adjoint_as<M>(op, y).norm();
  BracketingResult<Scalar> out;

  SolverConfig cfg = config;
  std::optional<M> warm;
  auto run = [&](double lambda) {
    if (warm) cfg.init = InitKind::Warm;
    auto res = solve_nuclear_psd<Scalar>(op, y, lambda, cfg, warm, norm_sq);
    ++out.solves;
    out.total_iterations += res.trace.iteration_count();
    const std::size_t rank = numerical_rank(res.solution, options.rank_tol);
    out.probes.emplace_back(lambda, rank);
    warm = res.solution;
    return std::pair<M, std::size_t>{std::move(res.solution), rank};
  };

  std::optional<M> best;
  double best_lambda = 0.0;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  auto consider = [&](double lambda, const M& x, std::size_t rank) {
    const std::size_t gap = rank > r ? rank - r : r - rank;
    // Exact rank: prefer the smallest lambda; otherwise keep the nearest rank.
    if (gap < best_gap || (gap == 0 && gap == best_gap && lambda < best_lambda)) {
      best_gap = gap;
      best = x;
      best_lambda = lambda;
    }
  };

  const double lo_exp = -4.0;
  double prev_lambda = 0.0;
  std::optional<M> prev_x;
  for (int g = 0; g < options.grid_points; ++g) {
    const double lambda =
        scale * std::pow(10.0, lo_exp * (1.0 - static_cast<double>(g) / (options.grid_points - 1)));
    auto [x, rank] = run(lambda);
    consider(lambda, x, rank);
    if (rank <= r) {
      if (g > 0 && rank == r) {
        // Bisect between the last lambda with rank > r and this one.
        double lo = prev_lambda, hi = lambda;
        warm = prev_x;
        for (int b = 0; b < options.bisection_steps; ++b) {
          const double mid = std::sqrt(lo * hi);
          auto [xm, rm] = run(mid);
          consider(mid, xm, rm);
          if (rm > r) lo = mid;
          else hi = mid;
        }
      }
      break;
    }
    prev_lambda = lambda;
    prev_x = x;
  }

  out.found = best_gap == 0;
  out.lambda = best_lambda;
  M x = *best;
  const double tr = std::real(x.trace());
  if (tr > 0.0) x /= tr;
  out.estimate.matrix = x;
  out.estimate.rank_used = numerical_rank(x, options.rank_tol);
  out.estimate.trace = std::real(x.trace());
  Eigen::SelfAdjointEigenSolver<M> es(x, Eigen::EigenvaluesOnly);
  for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i)
    if (es.eigenvalues()[i] > options.rank_tol * es.eigenvalues().maxCoeff())
      out.estimate.eigenvalues.push_back(es.eigenvalues()[i]);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace sparseproj
