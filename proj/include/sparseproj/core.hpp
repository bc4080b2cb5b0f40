#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparseproj {

using DenseVector = Eigen::VectorXd;
using IndexSet = std::vector<std::size_t>;

/// Raised when an argument is outside the domain of an operation
/// (k out of range, non-positive simplex level, non-finite input, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a request would exceed a configured work budget.
class BudgetError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Vector with an explicit, strictly increasing support.
struct SparseVector {
  std::size_t dimension = 0;
  IndexSet support;
  std::vector<double> values;

  SparseVector() = default;
  SparseVector(std::size_t dim, IndexSet supp, std::vector<double> vals)
      : dimension(dim), support(std::move(supp)), values(std::move(vals)) {
    if (support.size() != values.size())
      throw DomainError("SparseVector: support and values differ in length");
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (support[i] >= dimension)
        throw DomainError("SparseVector: support index out of range");
      if (i > 0 && support[i] <= support[i - 1])
        throw DomainError("SparseVector: support must be strictly increasing");
    }
  }

  static SparseVector from_dense(const DenseVector& x) {
    SparseVector out;
    out.dimension = static_cast<std::size_t>(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] != 0.0) {
        out.support.push_back(static_cast<std::size_t>(i));
        out.values.push_back(x[i]);
      }
    }
    return out;
  }

  DenseVector to_dense() const {
    DenseVector x = DenseVector::Zero(static_cast<Eigen::Index>(dimension));
    for (std::size_t i = 0; i < support.size(); ++i)
      x[static_cast<Eigen::Index>(support[i])] = values[i];
    return x;
  }

  /// Number of stored entries that are actually nonzero.
  std::size_t nonzeros() const {
    std::size_t n = 0;
    for (double v : values) n += (v != 0.0);
    return n;
  }

  double sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
};

enum class ConstraintKind {
  SimplexSparse,
  HyperplaneSparse,
  SimplexConvex,
  HyperplaneConvex,
  SparsityOnly,
};

inline const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::SimplexSparse: return "simplex-sparse";
    case ConstraintKind::HyperplaneSparse: return "hyperplane-sparse";
    case ConstraintKind::SimplexConvex: return "simplex-convex";
    case ConstraintKind::HyperplaneConvex: return "hyperplane-convex";
    case ConstraintKind::SparsityOnly: return "sparsity-only";
  }
  return "unknown";
}

/// Target set of a projection: sparsity level k (sparse kinds only) and
/// level lambda (ignored by SparsityOnly).
struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::SimplexSparse;
  std::optional<std::size_t> k;
  double lambda = 1.0;

  static ConstraintSpec simplex_sparse(std::size_t k, double lambda) {
    return {ConstraintKind::SimplexSparse, k, lambda};
  }
  static ConstraintSpec hyperplane_sparse(std::size_t k, double lambda) {
    return {ConstraintKind::HyperplaneSparse, k, lambda};
  }
  static ConstraintSpec simplex_convex(double lambda) {
    return {ConstraintKind::SimplexConvex, std::nullopt, lambda};
  }
  static ConstraintSpec hyperplane_convex(double lambda) {
    return {ConstraintKind::HyperplaneConvex, std::nullopt, lambda};
  }
  static ConstraintSpec sparsity_only(std::size_t k) {
    return {ConstraintKind::SparsityOnly, k, 0.0};
  }

  bool is_sparse() const {
    return kind == ConstraintKind::SimplexSparse ||
           kind == ConstraintKind::HyperplaneSparse ||
           kind == ConstraintKind::SparsityOnly;
  }
  bool is_simplex() const {
    return kind == ConstraintKind::SimplexSparse || kind == ConstraintKind::SimplexConvex;
  }

  void validate(std::size_t p) const {
    if (is_sparse()) {
      if (!k) throw DomainError(std::string(to_string(kind)) + " requires a sparsity level k");
      if (*k < 1 || *k > p)
        throw DomainError("sparsity level k=" + std::to_string(*k) + " outside [1, " +
                          std::to_string(p) + "]");
    }
    if (is_simplex() && !(lambda > 0.0))
      throw DomainError("simplex constraint requires lambda > 0");
    if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
  }
};

/// Output of a (sparse) Euclidean projection.
struct ProjectionResult {
  SparseVector beta;
  double tau = 0.0;          // shift subtracted on the support
  double distance_sq = 0.0;  // ||beta - w||^2
  double objective = 0.0;    // set-function value of the chosen support
};

namespace detail {

inline void require_finite(const DenseVector& w, const char* what) {
  if (w.size() == 0) throw DomainError(std::string(what) + ": empty input");
  if (!w.allFinite()) throw DomainError(std::string(what) + ": non-finite input");
}

inline double sq(double x) { return x * x; }

}  // namespace detail

}  // namespace sparseproj
