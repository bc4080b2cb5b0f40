#pragma once

// Projected gradient descent for quadratic losses over an arbitrary
// (possibly non-convex) projector.
//
// Gradient convention: for f(x) = ||y - A(x)||^2 we use grad f = 2 A^T(A x - y).
// Step rules are expressed against this convention.

#include "sparseproj/core.hpp"
#include "sparseproj/linops.hpp"
#include "sparseproj/rng.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace sparseproj {

/// Raised when an iteration produces non-finite values.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepRule {
  enum class Kind { FixedOverNormSq, Fixed, RipMotivated };
  Kind kind = Kind::FixedOverNormSq;
  double value = 3.0;

  /// mu = c / (2 ||A||^2): the update moves by (c / ||A||^2) A^T (y - A x).
  static StepRule fixed_over_norm_sq(double c = 3.0) { return {Kind::FixedOverNormSq, c}; }
  static StepRule fixed(double mu) { return {Kind::Fixed, mu}; }
  /// mu = 1 / (2 (1 + delta)): effective step 1/(1+delta) on A^T (y - A x).
  static StepRule rip_motivated(double delta) { return {Kind::RipMotivated, delta}; }
};

enum class InitKind { Zero, Random, Warm };
enum class Momentum { None, Nesterov };
enum class SolveStatus { Converged, MaxIters };

inline const char* to_string(SolveStatus s) {
  return s == SolveStatus::Converged ? "converged" : "max_iters";
}

struct SolverConfig {
  StepRule step = StepRule::fixed_over_norm_sq();
  int max_iters = 3000;
  double tol = 1e-5;  // relative iterate change
  InitKind init = InitKind::Zero;
  std::uint64_t init_seed = 0;
  Momentum momentum = Momentum::None;
  bool record_supports = true;

  void validate() const {
    if (max_iters < 1) throw DomainError("SolverConfig: max_iters must be >= 1");
    if (!(tol > 0.0)) throw DomainError("SolverConfig: tol must be > 0");
    if (step.kind == StepRule::Kind::Fixed && !(step.value > 0.0))
      throw DomainError("SolverConfig: fixed step must be > 0");
    if (step.kind == StepRule::Kind::FixedOverNormSq && !(step.value > 0.0))
      throw DomainError("SolverConfig: step constant must be > 0");
    if (step.kind == StepRule::Kind::RipMotivated && !(step.value > -1.0))
      throw DomainError("SolverConfig: RIP constant must exceed -1");
  }
};

struct IterationRecord {
  double objective = 0.0;
  double change = 0.0;  // relative change from the previous iterate (0 for the start point)
  IndexSet support;
};

struct SolveTrace {
  std::vector<IterationRecord> iterations;  // entry 0 is the (projected) start point
  SolveStatus status = SolveStatus::MaxIters;
  double step = 0.0;
  double seconds = 0.0;

  int iteration_count() const { return static_cast<int>(iterations.size()) - 1; }
  double final_objective() const { return iterations.empty() ? 0.0 : iterations.back().objective; }
  double seconds_per_iteration() const {
    return iteration_count() > 0 ? seconds / iteration_count() : 0.0;
  }
};

template <typename X>
struct SolveResult {
  X solution;
  SolveTrace trace;
};

namespace detail {

inline IndexSet support_of(const DenseVector& x) {
  IndexSet s;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) s.push_back(static_cast<std::size_t>(i));
  return s;
}
template <typename M>
IndexSet support_of(const M&) {
  return {};
}

}  // namespace detail

/// f(x) = ||y - A(x)||^2 for a vector or matrix-domain operator.
template <typename X, typename Op>
class LeastSquaresLoss {
 public:
  LeastSquaresLoss(const Op& op, DenseVector y, std::optional<double> norm_sq = std::nullopt)
      : op_(&op), y_(std::move(y)), norm_sq_(norm_sq) {
    if (y_.size() != op.rows()) throw DomainError("LeastSquaresLoss: y length != operator rows");
  }

  double value(const X& x) const { return (op_->apply(x) - y_).squaredNorm(); }

  std::pair<double, X> value_and_gradient(const X& x) const {
    const DenseVector r = op_->apply(x) - y_;
    return {r.squaredNorm(), 2.0 * adjoint_as<X>(*op_, r)};
  }

  /// ||A||^2, estimated by the power method on first use.
  double curvature() const {
    if (!norm_sq_) {
      const double n = operator_norm<X>(*op_, 500, 0x5eed);
      norm_sq_ = n * n;
    }
    return *norm_sq_;
  }

  X zero_point() const { return adjoint_as<X>(*op_, DenseVector::Zero(op_->rows())); }
  X random_point(Rng& rng) const { return random_domain_element<X>(*op_, rng); }

  const Op& op() const { return *op_; }
  const DenseVector& y() const { return y_; }

 private:
  const Op* op_;
  DenseVector y_;
  mutable std::optional<double> norm_sq_;
};

/// g(x) = x^T Q x - c^T x with symmetric PSD Q.
class QuadraticFormLoss {
 public:
  QuadraticFormLoss(RealMatrix q, DenseVector c, std::optional<double> lambda_max = std::nullopt)
      : q_(std::move(q)), c_(std::move(c)), lambda_max_(lambda_max) {
    if (q_.rows() != q_.cols() || q_.rows() != c_.size())
      throw DomainError("QuadraticFormLoss: dimension mismatch");
  }

  double value(const DenseVector& x) const { return x.dot(q_ * x) - c_.dot(x); }

  std::pair<double, DenseVector> value_and_gradient(const DenseVector& x) const {
    const DenseVector qx = q_ * x;
    return {x.dot(qx) - c_.dot(x), 2.0 * qx - c_};
  }

  /// Largest eigenvalue of Q (dense symmetric eigensolve on first use).
  double curvature() const {
    if (!lambda_max_) {
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(q_, Eigen::EigenvaluesOnly);
      lambda_max_ = es.eigenvalues().maxCoeff();
    }
    return *lambda_max_;
  }

  DenseVector zero_point() const { return DenseVector::Zero(c_.size()); }
  DenseVector random_point(Rng& rng) const { return gaussian_vector(c_.size(), rng); }

  const RealMatrix& q() const { return q_; }
  const DenseVector& c() const { return c_; }

 private:
  RealMatrix q_;
  DenseVector c_;
  mutable std::optional<double> lambda_max_;
};

template <typename Loss>
double step_size(const StepRule& rule, const Loss& loss) {
  switch (rule.kind) {
    case StepRule::Kind::Fixed: return rule.value;
    case StepRule::Kind::RipMotivated: return 1.0 / (2.0 * (1.0 + rule.value));
    case StepRule::Kind::FixedOverNormSq: {
      const double l = loss.curvature();
      if (!(l > 0.0)) throw SolverError("step_size: zero operator norm");
      return rule.value / (2.0 * l);
    }
  }
  throw DomainError("step_size: unknown rule");
}

/// Iterates x <- P(z - mu grad f(z)), z = x (or the Nesterov extrapolation),
/// until the relative iterate change drops below tol or max_iters is hit.
/// The start point is projected first, so every recorded iterate is feasible.
template <typename X, typename Loss, typename Projector>
SolveResult<X> minimize_projected(const Loss& loss, Projector&& project, const SolverConfig& config,
                                  const std::optional<X>& warm = std::nullopt) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const double mu = step_size(config.step, loss);

  X x;
  switch (config.init) {
    case InitKind::Zero: x = loss.zero_point(); break;
    case InitKind::Random: {
      Rng rng(config.init_seed);
      x = loss.random_point(rng);
      break;
    }
    case InitKind::Warm:
      if (!warm) throw DomainError("minimize_projected: warm start requested without a vector");
      x = *warm;
      break;
  }
  x = project(x);

  SolveResult<X> out;
  out.trace.step = mu;
  auto record = [&](double f, double change, const X& it) {
    IterationRecord rec{f, change, {}};
    if (config.record_supports) rec.support = detail::support_of(it);
    out.trace.iterations.push_back(std::move(rec));
  };

  auto [f, grad] = loss.value_and_gradient(x);
  record(f, 0.0, x);
  X x_prev = x;
  double t_prev = 1.0;
  out.trace.status = SolveStatus::MaxIters;

  for (int it = 1; it <= config.max_iters; ++it) {
    X x_new;
    if (config.momentum == Momentum::Nesterov) {
      const double t = (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev)) / 2.0;
      const X z = x + ((t_prev - 1.0) / t) * (x - x_prev);
      t_prev = t;
      auto zg = loss.value_and_gradient(z);
      x_new = z - mu * zg.second;
    } else {
      x_new = x - mu * grad;
    }
    if (!x_new.allFinite())
      throw SolverError("minimize_projected: non-finite gradient step at iteration " + std::to_string(it));
    x_new = project(x_new);

    const double denom = std::max(x_new.norm(), 1e-12);
    const double change = (x_new - x).norm() / denom;
    x_prev = std::move(x);
    x = std::move(x_new);
    // The momentum path takes its gradient at the extrapolated point.
    if (config.momentum == Momentum::Nesterov) f = loss.value(x);
    else std::tie(f, grad) = loss.value_and_gradient(x);
    if (!std::isfinite(f))
      throw SolverError("minimize_projected: non-finite objective at iteration " + std::to_string(it));
    record(f, change, x);
    if (change < config.tol) {
      out.trace.status = SolveStatus::Converged;
      break;
    }
  }
  out.solution = std::move(x);
  out.trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Projected gradient on f(x) = ||y - A(x)||^2.
template <typename X = DenseVector, typename Op, typename Projector>
SolveResult<X> solve_pgd(const Op& op, const DenseVector& y, Projector&& project,
                         const SolverConfig& config, const std::optional<X>& warm = std::nullopt,
                         std::optional<double> norm_sq = std::nullopt) {
  LeastSquaresLoss<X, Op> loss(op, y, norm_sq);
  return minimize_projected<X>(loss, std::forward<Projector>(project), config, warm);
}

/// ||P(x - mu grad f(x)) - x|| / max(||x||, 1e-12): zero at fixed points.
template <typename X, typename Loss, typename Projector>
double fixed_point_residual(const Loss& loss, Projector&& project, const X& x, double mu) {
  const auto [f, g] = loss.value_and_gradient(x);
  (void)f;
  const X next = project(X(x - mu * g));
  return (next - x).norm() / std::max(x.norm(), 1e-12);
}

/// Largest scaled discrepancy between the analytic gradient of
/// ||y - A beta||^2 and a central finite difference, over `probes` random
/// coordinates (all coordinates when p <= probes).
inline double gradient_check(const LinearOperator& op, const DenseVector& y, const DenseVector& beta,
                             double h, int probes = 20, std::uint64_t seed = 1) {
  if (!(h > 0.0)) throw DomainError("gradient_check: h must be > 0");
  LeastSquaresLoss<DenseVector, LinearOperator> loss(op, y);
  const DenseVector grad = loss.value_and_gradient(beta).second;
  const auto p = static_cast<std::size_t>(beta.size());
  IndexSet coords;
  if (p <= static_cast<std::size_t>(probes)) {
    for (std::size_t i = 0; i < p; ++i) coords.push_back(i);
  } else {
    Rng rng(seed);
    coords = sample_without_replacement(p, static_cast<std::size_t>(probes), rng);
  }
  double worst = 0.0;
  for (auto j : coords) {
    const auto jj = static_cast<Eigen::Index>(j);
    DenseVector plus = beta, minus = beta;
    plus[jj] += h;
    minus[jj] -= h;
    const double fd = (loss.value(plus) - loss.value(minus)) / (2.0 * h);
    worst = std::max(worst, std::abs(grad[jj] - fd) / (1.0 + std::abs(grad[jj])));
  }
  return worst;
}

}  // namespace sparseproj
