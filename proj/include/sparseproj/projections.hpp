#pragma once

// Exact Euclidean projectors onto the simplex, the hyperplane {sum = lambda},
// and their intersections with the set of k-sparse vectors.

#include "sparseproj/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sparseproj {

/// Convex projection output: the projected vector and the shift tau.
struct ConvexProjection {
  DenseVector beta;
  double tau = 0.0;
};

namespace detail {

/// Indices of the k first elements of {0..p-1} under the strict total order
/// `before`, returned in that order. Small k uses a partial sort, larger k an
/// nth_element selection followed by sorting the selected prefix.
template <typename Before>
IndexSet ordered_prefix(std::size_t p, std::size_t k, Before before) {
  if (k * k <= p) {
    // Bounded heap over one sequential pass: most entries lose to the root.
    IndexSet heap;
    heap.reserve(k);
    for (std::size_t i = 0; i < p; ++i) {
      if (heap.size() < k) {
        heap.push_back(i);
        std::push_heap(heap.begin(), heap.end(), before);
      } else if (before(i, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), before);
        heap.back() = i;
        std::push_heap(heap.begin(), heap.end(), before);
      }
    }
    std::sort(heap.begin(), heap.end(), before);
    return heap;
  }
  IndexSet idx(p);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto mid = idx.begin() + static_cast<std::ptrdiff_t>(k);
  if (k < p) std::nth_element(idx.begin(), mid, idx.end(), before);
  std::sort(idx.begin(), mid, before);
  idx.resize(k);
  return idx;
}

/// Descending signed value, lowest index first among equal values.
inline auto descending(const DenseVector& w) {
  return [&w](std::size_t a, std::size_t b) {
    const double wa = w[static_cast<Eigen::Index>(a)], wb = w[static_cast<Eigen::Index>(b)];
    return wa > wb || (wa == wb && a < b);
  };
}

/// Ascending signed value, lowest index first among equal values.
inline auto ascending(const DenseVector& w) {
  return [&w](std::size_t a, std::size_t b) {
    const double wa = w[static_cast<Eigen::Index>(a)], wb = w[static_cast<Eigen::Index>(b)];
    return wa < wb || (wa == wb && a < b);
  };
}

inline DenseVector gather(const DenseVector& w, const IndexSet& s) {
  DenseVector out(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) out[static_cast<Eigen::Index>(i)] = w[static_cast<Eigen::Index>(s[i])];
  return out;
}

inline void check_index_set(const IndexSet& s, std::size_t p, const char* what) {
  if (s.empty()) throw DomainError(std::string(what) + ": empty index set");
  std::vector<bool> seen(p, false);
  for (auto i : s) {
    if (i >= p) throw DomainError(std::string(what) + ": index out of range");
    if (seen[i]) throw DomainError(std::string(what) + ": duplicate index");
    seen[i] = true;
  }
}

/// Packs the selected entries into a SparseVector with sorted support and
/// computes ||beta - w||^2 over all p coordinates.
inline std::pair<SparseVector, double> embed(const DenseVector& w, const IndexSet& selected,
                                             const DenseVector& values) {
  const auto p = static_cast<std::size_t>(w.size());
  std::vector<std::size_t> order(selected.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return selected[a] < selected[b]; });

  SparseVector beta;
  beta.dimension = p;
  beta.support.reserve(selected.size());
  beta.values.reserve(selected.size());
  std::vector<bool> on(p, false);
  double dist = 0.0;
  for (auto o : order) {
    const auto i = selected[o];
    const double v = values[static_cast<Eigen::Index>(o)];
    beta.support.push_back(i);
    beta.values.push_back(v);
    on[i] = true;
    dist += sq(v - w[static_cast<Eigen::Index>(i)]);
  }
  for (std::size_t i = 0; i < p; ++i)
    if (!on[i]) dist += sq(w[static_cast<Eigen::Index>(i)]);
  return {std::move(beta), dist};
}

}  // namespace detail

/// Keeps the k largest entries of w by signed value (not magnitude); ties go
/// to the lowest index.
inline SparseVector top_k_select(const DenseVector& w, std::size_t k) {
  detail::require_finite(w, "top_k_select");
  const auto p = static_cast<std::size_t>(w.size());
  if (k < 1 || k > p) throw DomainError("top_k_select: k outside [1, p]");
  IndexSet s = detail::ordered_prefix(p, k, detail::descending(w));
  std::sort(s.begin(), s.end());
  std::vector<double> vals;
  vals.reserve(k);
  for (auto i : s) vals.push_back(w[static_cast<Eigen::Index>(i)]);
  return SparseVector(p, std::move(s), std::move(vals));
}

/// Keeps the k largest entries in magnitude (hard thresholding); ties go to
/// the lowest index.
inline SparseVector top_k_magnitude(const DenseVector& w, std::size_t k) {
  detail::require_finite(w, "top_k_magnitude");
  const auto p = static_cast<std::size_t>(w.size());
  if (k < 1 || k > p) throw DomainError("top_k_magnitude: k outside [1, p]");
  const DenseVector mag = w.cwiseAbs();
  IndexSet s = detail::ordered_prefix(p, k, detail::descending(mag));
  std::sort(s.begin(), s.end());
  std::vector<double> vals;
  vals.reserve(k);
  for (auto i : s) vals.push_back(w[static_cast<Eigen::Index>(i)]);
  return SparseVector(p, std::move(s), std::move(vals));
}

/// Euclidean projection onto {beta >= 0, sum(beta) = lambda}, lambda > 0.
/// beta_i = [w_i - tau]_+ with tau from the sorted-prefix rule.
inline ConvexProjection project_simplex(const DenseVector& w, double lambda) {
  detail::require_finite(w, "project_simplex");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw DomainError("project_simplex: lambda must be positive and finite");

  std::vector<double> u(w.data(), w.data() + w.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, rho_sum = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    if (u[j] > (cumsum - lambda) / static_cast<double>(j + 1)) {
      rho = j + 1;
      rho_sum = cumsum;
    }
  }
  // rho >= 1 always: u[0] > u[0] - lambda.
  ConvexProjection out;
  out.tau = (rho_sum - lambda) / static_cast<double>(rho);
  out.beta = (w.array() - out.tau).max(0.0).matrix();
  return out;
}

/// Euclidean projection onto the hyperplane {sum(beta) = lambda}.
inline ConvexProjection project_hyperplane(const DenseVector& w, double lambda) {
  detail::require_finite(w, "project_hyperplane");
  if (!std::isfinite(lambda)) throw DomainError("project_hyperplane: lambda must be finite");
  ConvexProjection out;
  out.tau = (w.sum() - lambda) / static_cast<double>(w.size());
  out.beta = (w.array() - out.tau).matrix();
  return out;
}

/// F+(S): sum over the support of P_simplex(w|S) of (w_i^2 - tau^2). Equals
/// ||w||^2 minus the distance from w to the best vector supported on S.
inline double set_function_simplex(const DenseVector& w, const IndexSet& s, double lambda) {
  detail::require_finite(w, "set_function_simplex");
  detail::check_index_set(s, static_cast<std::size_t>(w.size()), "set_function_simplex");
  const DenseVector ws = detail::gather(w, s);
  const auto proj = project_simplex(ws, lambda);
  double f = 0.0;
  for (Eigen::Index i = 0; i < ws.size(); ++i)
    if (proj.beta[i] > 0.0) f += detail::sq(ws[i]) - detail::sq(proj.tau);
  return f;
}

/// Right-hand side of the telescoping identity
///   sum b_i^2 - (sum b_i - lambda)^2 / k
///     = lambda (2 b_1 - lambda) + sum_{j>=2} (j-1)/j (b_j - (sum_{i<j} b_i - lambda)/(j-1))^2
/// evaluated in the given order of b.
inline double telescoped_set_value(const DenseVector& b, double lambda) {
  if (b.size() == 0) throw DomainError("telescoped_set_value: empty vector");
  double total = lambda * (2.0 * b[0] - lambda);
  double prefix = b[0];
  for (Eigen::Index j = 1; j < b.size(); ++j) {
    const double jj = static_cast<double>(j + 1);
    const double shifted_mean = (prefix - lambda) / (jj - 1.0);
    total += (jj - 1.0) / jj * detail::sq(b[j] - shifted_mean);
    prefix += b[j];
  }
  return total;
}

/// F(S) + increment gained by adding index i: |S|/(|S|+1) (w_i - (sum_S w - lambda)/|S|)^2.
inline double set_function_increment(const DenseVector& w, const IndexSet& s, std::size_t i,
                                     double lambda) {
  detail::check_index_set(s, static_cast<std::size_t>(w.size()), "set_function_increment");
  if (i >= static_cast<std::size_t>(w.size()) || std::find(s.begin(), s.end(), i) != s.end())
    throw DomainError("set_function_increment: index must lie outside S");
  double sum = 0.0;
  for (auto j : s) sum += w[static_cast<Eigen::Index>(j)];
  const double n = static_cast<double>(s.size());
  return n / (n + 1.0) * detail::sq(w[static_cast<Eigen::Index>(i)] - (sum - lambda) / n);
}

/// F(S) = sum_S w_i^2 - (sum_S w_i - lambda)^2 / |S|.
/// With verify_identity, also evaluates the telescoped form (ordered so the
/// first element maximizes lambda * w_i) and throws std::logic_error if the
/// two disagree beyond 1e-9 relative.
inline double set_function_hyperplane(const DenseVector& w, const IndexSet& s, double lambda,
                                      bool verify_identity = false) {
  detail::require_finite(w, "set_function_hyperplane");
  detail::check_index_set(s, static_cast<std::size_t>(w.size()), "set_function_hyperplane");
  double sq_sum = 0.0, sum = 0.0;
  for (auto i : s) {
    const double v = w[static_cast<Eigen::Index>(i)];
    sq_sum += v * v;
    sum += v;
  }
  const double f = sq_sum - detail::sq(sum - lambda) / static_cast<double>(s.size());
  if (verify_identity) {
    DenseVector b = detail::gather(w, s);
    Eigen::Index lead = 0;
    for (Eigen::Index i = 1; i < b.size(); ++i)
      if (lambda * b[i] > lambda * b[lead]) lead = i;
    std::swap(b[0], b[lead]);
    const double rhs = telescoped_set_value(b, lambda);
    if (std::abs(rhs - f) > 1e-9 * (1.0 + std::abs(f)))
      throw std::logic_error("set_function_hyperplane: telescoping identity violated");
  }
  return f;
}

/// Greedy selector and simplex projector: keep the k largest signed entries,
/// then project them onto the simplex of level lambda. Exact for
/// argmin ||beta - w|| over k-sparse beta >= 0 with sum(beta) = lambda.
inline ProjectionResult gssp(const DenseVector& w, std::size_t k, double lambda) {
  detail::require_finite(w, "gssp");
  const auto p = static_cast<std::size_t>(w.size());
  ConstraintSpec::simplex_sparse(k, lambda).validate(p);

  const IndexSet selected = detail::ordered_prefix(p, k, detail::descending(w));
  const DenseVector ws = detail::gather(w, selected);
  const auto proj = project_simplex(ws, lambda);

  ProjectionResult out;
  out.tau = proj.tau;
  std::tie(out.beta, out.distance_sq) = detail::embed(w, selected, proj.beta);
  for (Eigen::Index i = 0; i < ws.size(); ++i)
    if (proj.beta[i] > 0.0) out.objective += detail::sq(ws[i]) - detail::sq(proj.tau);
  return out;
}

/// Greedy selector and hyperplane projector. Seeds with argmax lambda * w_i
/// (argmax w_i when lambda = 0), then repeatedly adds the remaining index
/// farthest from the lambda-adjusted mean (sum_S w - lambda) / |S|. Exact for
/// argmin ||beta - w|| over k-sparse beta with sum(beta) = lambda.
inline ProjectionResult gshp(const DenseVector& w, std::size_t k, double lambda) {
  detail::require_finite(w, "gshp");
  const auto p = static_cast<std::size_t>(w.size());
  ConstraintSpec::hyperplane_sparse(k, lambda).validate(p);

  // The farthest remaining element from any point is the largest or the
  // smallest remaining one, so k steps of each order suffice.
  const IndexSet down = detail::ordered_prefix(p, k, detail::descending(w));
  const IndexSet up = detail::ordered_prefix(p, k, detail::ascending(w));
  std::vector<bool> taken(p, false);
  std::size_t di = 0, ui = 0;
  auto next_unused = [&taken](const IndexSet& order, std::size_t& pos) {
    while (taken[order[pos]]) ++pos;
    return order[pos];
  };

  IndexSet selected;
  selected.reserve(k);
  const std::size_t seed = lambda < 0.0 ? up[0] : down[0];
  selected.push_back(seed);
  taken[seed] = true;
  double sum = w[static_cast<Eigen::Index>(seed)];

  while (selected.size() < k) {
    const std::size_t hi = next_unused(down, di);
    const std::size_t lo = next_unused(up, ui);
    const double mean = (sum - lambda) / static_cast<double>(selected.size());
    const double d_hi = std::abs(w[static_cast<Eigen::Index>(hi)] - mean);
    const double d_lo = std::abs(w[static_cast<Eigen::Index>(lo)] - mean);
    std::size_t pick;
    if (d_hi > d_lo) pick = hi;
    else if (d_lo > d_hi) pick = lo;
    else pick = std::min(hi, lo);
    selected.push_back(pick);
    taken[pick] = true;
    sum += w[static_cast<Eigen::Index>(pick)];
  }

  const DenseVector ws = detail::gather(w, selected);
  const auto proj = project_hyperplane(ws, lambda);

  ProjectionResult out;
  out.tau = proj.tau;
  std::tie(out.beta, out.distance_sq) = detail::embed(w, selected, proj.beta);
  out.objective = ws.squaredNorm() - detail::sq(ws.sum() - lambda) / static_cast<double>(k);
  return out;
}

/// Dispatches on the constraint kind. Convex kinds return a dense support.
inline ProjectionResult project(const DenseVector& w, const ConstraintSpec& spec) {
  detail::require_finite(w, "project");
  const auto p = static_cast<std::size_t>(w.size());
  spec.validate(p);
  switch (spec.kind) {
    case ConstraintKind::SimplexSparse: return gssp(w, *spec.k, spec.lambda);
    case ConstraintKind::HyperplaneSparse: return gshp(w, *spec.k, spec.lambda);
    case ConstraintKind::SparsityOnly: {
      ProjectionResult out;
      out.beta = top_k_magnitude(w, *spec.k);
      out.distance_sq = w.squaredNorm() - Eigen::Map<const DenseVector>(
                                              out.beta.values.data(),
                                              static_cast<Eigen::Index>(out.beta.values.size()))
                                              .squaredNorm();
      out.objective = w.squaredNorm() - out.distance_sq;
      return out;
    }
    case ConstraintKind::SimplexConvex:
    case ConstraintKind::HyperplaneConvex: {
      const auto proj = spec.kind == ConstraintKind::SimplexConvex
                            ? project_simplex(w, spec.lambda)
                            : project_hyperplane(w, spec.lambda);
      IndexSet all(p);
      std::iota(all.begin(), all.end(), std::size_t{0});
      ProjectionResult out;
      out.tau = proj.tau;
      std::tie(out.beta, out.distance_sq) = detail::embed(w, all, proj.beta);
      out.objective = w.squaredNorm() - out.distance_sq;
      return out;
    }
  }
  throw DomainError("project: unknown constraint kind");
}

/// Dense-vector projector for use inside iterative solvers.
inline auto make_projector(ConstraintSpec spec) {
  return [spec](const DenseVector& w) -> DenseVector { return project(w, spec).beta.to_dense(); };
}

}  // namespace sparseproj
