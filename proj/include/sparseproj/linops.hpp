#pragma once

// Linear measurement operators: dense matrices, stacks of operators, and the
// implicit random Pauli ensemble acting on d x d Hermitian matrices.

#include "sparseproj/core.hpp"
#include "sparseproj/rng.hpp"

#include <bit>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

namespace sparseproj {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// A : R^p -> R^m with its adjoint.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual DenseVector apply(const DenseVector& x) const = 0;
  virtual DenseVector adjoint(const DenseVector& y) const = 0;
};

class DenseMatrixOperator final : public LinearOperator {
 public:
  explicit DenseMatrixOperator(RealMatrix a) : a_(std::move(a)) {}
  Eigen::Index rows() const override { return a_.rows(); }
  Eigen::Index cols() const override { return a_.cols(); }
  DenseVector apply(const DenseVector& x) const override {
    check(x.size() == a_.cols());
    return a_ * x;
  }
  DenseVector adjoint(const DenseVector& y) const override {
    check(y.size() == a_.rows());
    return a_.transpose() * y;
  }
  const RealMatrix& matrix() const { return a_; }

 private:
  static void check(bool ok) {
    if (!ok) throw DomainError("DenseMatrixOperator: dimension mismatch");
  }
  RealMatrix a_;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(Eigen::Index n) : n_(n) {}
  Eigen::Index rows() const override { return n_; }
  Eigen::Index cols() const override { return n_; }
  DenseVector apply(const DenseVector& x) const override { return x; }
  DenseVector adjoint(const DenseVector& y) const override { return y; }

 private:
  Eigen::Index n_;
};

/// Vertical concatenation [A_1; A_2; ...] of operators sharing a domain.
class StackedOperator final : public LinearOperator {
 public:
  explicit StackedOperator(std::vector<std::shared_ptr<const LinearOperator>> blocks)
      : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw DomainError("StackedOperator: no blocks");
    for (const auto& b : blocks_) {
      if (b->cols() != blocks_.front()->cols())
        throw DomainError("StackedOperator: blocks disagree on input dimension");
      rows_ += b->rows();
    }
  }
  Eigen::Index rows() const override { return rows_; }
  Eigen::Index cols() const override { return blocks_.front()->cols(); }
  DenseVector apply(const DenseVector& x) const override {
    DenseVector out(rows_);
    Eigen::Index off = 0;
    for (const auto& b : blocks_) {
      out.segment(off, b->rows()) = b->apply(x);
      off += b->rows();
    }
    return out;
  }
  DenseVector adjoint(const DenseVector& y) const override {
    if (y.size() != rows_) throw DomainError("StackedOperator: dimension mismatch");
    DenseVector out = DenseVector::Zero(cols());
    Eigen::Index off = 0;
    for (const auto& b : blocks_) {
      out += b->adjoint(y.segment(off, b->rows()));
      off += b->rows();
    }
    return out;
  }

 private:
  std::vector<std::shared_ptr<const LinearOperator>> blocks_;
  Eigen::Index rows_ = 0;
};

/// iid N(0,1) m x p matrix, optionally with unit-norm columns. `identity`
/// replaces the draw by the p x p identity (m must equal p).
inline DenseMatrixOperator gaussian_matrix(Eigen::Index m, Eigen::Index p, bool column_normalized,
                                           std::uint64_t seed, bool identity = false) {
  if (m < 1 || p < 1) throw DomainError("gaussian_matrix: dimensions must be positive");
  if (identity) {
    if (m != p) throw DomainError("gaussian_matrix: identity override needs m == p");
    return DenseMatrixOperator(RealMatrix::Identity(m, p));
  }
  Rng rng(seed);
  RealMatrix a = gaussian_matrix_entries(m, p, rng);
  if (column_normalized) a.colwise().normalize();
  return DenseMatrixOperator(std::move(a));
}

/// One tensor product of single-qubit Paulis. Digit j of `code` in base 4
/// (most significant first, qubit 0 first) selects I, X, Y or Z.
struct PauliString {
  std::uint64_t code = 0;
  std::uint64_t flip_mask = 0;   // qubits carrying X or Y
  std::uint64_t phase_mask = 0;  // qubits carrying Z or Y
  int y_count = 0;

  static PauliString from_code(std::uint64_t code, int qubits) {
    PauliString s;
    s.code = code;
    for (int q = 0; q < qubits; ++q) {
      const auto digit = (code >> (2 * (qubits - 1 - q))) & 3U;
      const std::uint64_t bit = std::uint64_t{1} << (qubits - 1 - q);
      if (digit == 1 || digit == 2) s.flip_mask |= bit;
      if (digit == 2 || digit == 3) s.phase_mask |= bit;
      if (digit == 2) ++s.y_count;
    }
    return s;
  }

  std::string label(int qubits) const {
    static constexpr char names[] = {'I', 'X', 'Y', 'Z'};
    std::string out;
    for (int q = 0; q < qubits; ++q) out += names[(code >> (2 * (qubits - 1 - q))) & 3U];
    return out;
  }

  /// Nonzero entry of row r sits in column r ^ flip_mask and equals
  /// (-i)^y_count * (-1)^popcount(r & phase_mask).
  std::complex<double> entry(std::uint64_t row) const {
    static const std::complex<double> powers[] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    const double sign = (std::popcount(row & phase_mask) & 1) ? -1.0 : 1.0;
    return sign * powers[y_count & 3];
  }

  bool is_real() const { return (y_count & 1) == 0; }
};

/// Random Pauli measurement ensemble: A(X)_i = scale * tr(E_i X), scale =
/// 1/sqrt(m), observables distinct and drawn uniformly from {I,X,Y,Z}^n.
/// Applied in O(m d) through the signed-permutation structure of each E_i.
class PauliEnsemble {
 public:
  PauliEnsemble(int qubits, std::vector<PauliString> observables)
      : qubits_(qubits), dim_(Eigen::Index{1} << qubits), obs_(std::move(observables)) {
    if (obs_.empty()) throw DomainError("PauliEnsemble: no observables");
    scale_ = 1.0 / std::sqrt(static_cast<double>(obs_.size()));
  }

  int qubits() const { return qubits_; }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index rows() const { return static_cast<Eigen::Index>(obs_.size()); }
  double scale() const { return scale_; }
  const std::vector<PauliString>& observables() const { return obs_; }

  DenseVector apply(const ComplexMatrix& x) const {
    check_domain(x.rows(), x.cols());
    DenseVector out(rows());
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const auto& e = obs_[i];
      std::complex<double> tr = 0.0;
      for (Eigen::Index r = 0; r < dim_; ++r) {
        const auto c = static_cast<Eigen::Index>(static_cast<std::uint64_t>(r) ^ e.flip_mask);
        tr += e.entry(static_cast<std::uint64_t>(r)) * x(c, r);
      }
      out[static_cast<Eigen::Index>(i)] = scale_ * tr.real();
    }
    return out;
  }

  /// Real symmetric inputs: observables with an odd number of Y's are purely
  /// imaginary and contribute zero.
  DenseVector apply(const RealMatrix& x) const {
    check_domain(x.rows(), x.cols());
    DenseVector out(rows());
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const auto& e = obs_[i];
      double tr = 0.0;
      if (e.is_real()) {
        const double base = (e.y_count & 2) ? -1.0 : 1.0;
        for (Eigen::Index r = 0; r < dim_; ++r) {
          const auto ur = static_cast<std::uint64_t>(r);
          const double v = x(static_cast<Eigen::Index>(ur ^ e.flip_mask), r);
          tr += (std::popcount(ur & e.phase_mask) & 1) ? -v : v;
        }
        tr *= base;
      }
      out[static_cast<Eigen::Index>(i)] = scale_ * tr;
    }
    return out;
  }

  /// sum_i y_i * scale * E_i (Hermitian).
  ComplexMatrix adjoint_complex(const DenseVector& y) const {
    check_range(y.size());
    ComplexMatrix out = ComplexMatrix::Zero(dim_, dim_);
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const auto& e = obs_[i];
      const double coef = scale_ * y[static_cast<Eigen::Index>(i)];
      for (Eigen::Index r = 0; r < dim_; ++r) {
        const auto c = static_cast<Eigen::Index>(static_cast<std::uint64_t>(r) ^ e.flip_mask);
        out(r, c) += coef * e.entry(static_cast<std::uint64_t>(r));
      }
    }
    return out;
  }

  /// Adjoint onto the real symmetric domain: the real part of adjoint_complex.
  RealMatrix adjoint(const DenseVector& y) const {
    check_range(y.size());
    RealMatrix out = RealMatrix::Zero(dim_, dim_);
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const auto& e = obs_[i];
      if (!e.is_real()) continue;
      const double coef = scale_ * y[static_cast<Eigen::Index>(i)] * ((e.y_count & 2) ? -1.0 : 1.0);
      for (Eigen::Index r = 0; r < dim_; ++r) {
        const auto ur = static_cast<std::uint64_t>(r);
        out(r, static_cast<Eigen::Index>(ur ^ e.flip_mask)) +=
            (std::popcount(ur & e.phase_mask) & 1) ? -coef : coef;
      }
    }
    return out;
  }

  /// Dense E_i (unscaled), for tests and small-case oracles.
  ComplexMatrix observable(std::size_t i) const {
    ComplexMatrix e = ComplexMatrix::Zero(dim_, dim_);
    for (Eigen::Index r = 0; r < dim_; ++r)
      e(r, static_cast<Eigen::Index>(static_cast<std::uint64_t>(r) ^ obs_.at(i).flip_mask)) =
          obs_[i].entry(static_cast<std::uint64_t>(r));
    return e;
  }

 private:
  void check_domain(Eigen::Index r, Eigen::Index c) const {
    if (r != dim_ || c != dim_) throw DomainError("PauliEnsemble: input must be d x d");
  }
  void check_range(Eigen::Index m) const {
    if (m != rows()) throw DomainError("PauliEnsemble: measurement vector length mismatch");
  }

  int qubits_;
  Eigen::Index dim_;
  std::vector<PauliString> obs_;
  double scale_ = 1.0;
};

/// m distinct Pauli observables on n qubits, sampled uniformly without
/// replacement.
inline PauliEnsemble pauli_operator(int qubits, std::size_t m, std::uint64_t seed) {
  if (qubits < 1 || qubits > 15) throw DomainError("pauli_operator: qubits must lie in [1, 15]");
  const std::size_t total = std::size_t{1} << (2 * qubits);
  if (m < 1 || m > total)
    throw DomainError("pauli_operator: m=" + std::to_string(m) + " outside [1, 4^n=" +
                      std::to_string(total) + "]");
  Rng rng(seed);
  const IndexSet codes = sample_without_replacement(total, m, rng);
  std::vector<PauliString> obs;
  obs.reserve(m);
  for (auto c : codes) obs.push_back(PauliString::from_code(c, qubits));
  return PauliEnsemble(qubits, std::move(obs));
}

namespace detail {

inline DenseVector adjoint_as(const LinearOperator& op, const DenseVector& y, const DenseVector*) {
  return op.adjoint(y);
}
inline RealMatrix adjoint_as(const PauliEnsemble& op, const DenseVector& y, const RealMatrix*) {
  return op.adjoint(y);
}
inline ComplexMatrix adjoint_as(const PauliEnsemble& op, const DenseVector& y, const ComplexMatrix*) {
  return op.adjoint_complex(y);
}

inline DenseVector random_domain(const LinearOperator& op, Rng& rng, const DenseVector*) {
  return gaussian_vector(op.cols(), rng);
}
inline RealMatrix random_domain(const PauliEnsemble& op, Rng& rng, const RealMatrix*) {
  RealMatrix g = gaussian_matrix_entries(op.dim(), op.dim(), rng);
  return (g + g.transpose()) / 2.0;
}
inline ComplexMatrix random_domain(const PauliEnsemble& op, Rng& rng, const ComplexMatrix*) {
  RealMatrix re = gaussian_matrix_entries(op.dim(), op.dim(), rng);
  RealMatrix im = gaussian_matrix_entries(op.dim(), op.dim(), rng);
  ComplexMatrix g(op.dim(), op.dim());
  g.real() = re;
  g.imag() = im;
  return (g + g.adjoint()) / 2.0;
}

}  // namespace detail

/// Adjoint of `op` landing in the domain type X.
template <typename X, typename Op>
X adjoint_as(const Op& op, const DenseVector& y) {
  return detail::adjoint_as(op, y, static_cast<const X*>(nullptr));
}

/// Random element of the domain of `op` of type X (Gaussian; Hermitian for
/// matrix domains).
template <typename X, typename Op>
X random_domain_element(const Op& op, Rng& rng) {
  return detail::random_domain(op, rng, static_cast<const X*>(nullptr));
}

/// Frobenius / Euclidean inner product, real part.
template <typename X>
double inner(const X& a, const X& b) {
  if constexpr (std::is_same_v<typename X::Scalar, double>) return a.cwiseProduct(b).sum();
  else return a.cwiseProduct(b.conjugate()).sum().real();
}

/// Power-method estimate of ||A|| on the domain type X. Stops after `iters`
/// iterations or when successive Rayleigh quotients agree to 1e-8 relative.
template <typename X = DenseVector, typename Op>
double operator_norm(const Op& op, int iters, std::uint64_t seed) {
  if (iters < 1) throw DomainError("operator_norm: iters must be >= 1");
  Rng rng(seed);
  X x = random_domain_element<X>(op, rng);
  x /= x.norm();
  double prev = 0.0, rq = 0.0;
  for (int it = 0; it < iters; ++it) {
    X z = adjoint_as<X>(op, op.apply(x));
    rq = inner(x, z);
    const double nz = z.norm();
    if (nz == 0.0) return 0.0;
    x = z / nz;
    if (it > 0 && std::abs(rq - prev) < 1e-8 * std::abs(rq)) break;
    prev = rq;
  }
  return std::sqrt(std::max(rq, 0.0));
}

/// y_clean + iid Gaussian noise with total expected energy ||y||^2 / 10^(snr/10).
/// An infinite snr_db returns y_clean unchanged.
inline DenseVector add_noise_snr(const DenseVector& y_clean, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return y_clean;
  const double energy = y_clean.squaredNorm();
  if (!(energy > 0.0)) throw DomainError("add_noise_snr: clean signal has zero energy");
  if (std::isnan(snr_db)) throw DomainError("add_noise_snr: snr_db is NaN");
  const double noise_energy = energy / std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(noise_energy / static_cast<double>(y_clean.size()));
  Rng rng(seed);
  return y_clean + sigma * gaussian_vector(y_clean.size(), rng);
}

/// Monte-Carlo lower bound on the k-RIP constant: max over random unit-norm
/// k-sparse x of | ||A x||^2 - 1 |. Diagnostic only.
inline double estimate_rip_constant(const LinearOperator& op, std::size_t k, int trials,
                                    std::uint64_t seed) {
  const auto p = static_cast<std::size_t>(op.cols());
  if (k < 1 || k > p) throw DomainError("estimate_rip_constant: k outside [1, p]");
  if (trials < 1) throw DomainError("estimate_rip_constant: trials must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    DenseVector x = DenseVector::Zero(op.cols());
    for (auto i : sample_without_replacement(p, k, rng)) x[static_cast<Eigen::Index>(i)] = normal(rng);
    const double n = x.norm();
    if (n == 0.0) continue;
    x /= n;
    worst = std::max(worst, std::abs(op.apply(x).squaredNorm() - 1.0));
  }
  return worst;
}

}  // namespace sparseproj
