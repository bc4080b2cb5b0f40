#pragma once

// Exhaustive support enumeration for the sparse simplex / hyperplane
// projection problems. Slow on purpose: every k-subset is scored.

#include "sparseproj/core.hpp"
#include "sparseproj/projections.hpp"

#include <cstdint>
#include <limits>
#include <string>

namespace sparseproj {

struct OracleResult {
  IndexSet best_support;
  SparseVector best_beta;
  double best_distance_sq = std::numeric_limits<double>::infinity();
  std::uint64_t enumerated = 0;
};

struct OracleOptions {
  std::uint64_t max_supports = 1'000'000;
};

/// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // r * num / i is exact at every step; guard the multiplication.
    if (r > std::numeric_limits<std::uint64_t>::max() / num)
      return std::numeric_limits<std::uint64_t>::max();
    r = r * num / i;
  }
  return r;
}

/// Visits every k-subset of {0..p-1} in lexicographic order.
template <typename Visit>
void for_each_combination(std::size_t p, std::size_t k, Visit&& visit) {
  IndexSet s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = i;
  while (true) {
    visit(static_cast<const IndexSet&>(s));
    std::size_t i = k;
    while (i > 0 && s[i - 1] == p - k + i - 1) --i;
    if (i == 0) return;
    ++s[i - 1];
    for (std::size_t j = i; j < k; ++j) s[j] = s[j - 1] + 1;
  }
}

/// Scores every support of size exactly k: convex projection of w|S onto the
/// simplex or hyperplane, zero padding, squared distance to w. Returns the
/// lexicographically first minimizer.
inline OracleResult oracle_project(const DenseVector& w, const ConstraintSpec& spec,
                                   const OracleOptions& options = {}) {
  detail::require_finite(w, "oracle_project");
  const auto p = static_cast<std::size_t>(w.size());
  if (spec.kind != ConstraintKind::SimplexSparse && spec.kind != ConstraintKind::HyperplaneSparse)
    throw DomainError("oracle_project: only sparse simplex/hyperplane constraints are enumerable");
  spec.validate(p);
  const std::size_t k = *spec.k;
  const std::uint64_t count = binomial(p, k);
  if (count > options.max_supports)
    throw BudgetError("oracle_project: C(" + std::to_string(p) + ", " + std::to_string(k) +
                      ") = " + std::to_string(count) + " supports exceeds the budget of " +
                      std::to_string(options.max_supports));

  OracleResult best;
  DenseVector ws(static_cast<Eigen::Index>(k));
  std::vector<bool> on(p, false);
  for_each_combination(p, k, [&](const IndexSet& s) {
    ++best.enumerated;
    for (std::size_t i = 0; i < k; ++i) ws[static_cast<Eigen::Index>(i)] = w[static_cast<Eigen::Index>(s[i])];
    const auto proj = spec.kind == ConstraintKind::SimplexSparse ? project_simplex(ws, spec.lambda)
                                                                 : project_hyperplane(ws, spec.lambda);
    for (auto i : s) on[i] = true;
    double dist = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      dist += detail::sq(proj.beta[static_cast<Eigen::Index>(i)] - ws[static_cast<Eigen::Index>(i)]);
    for (std::size_t i = 0; i < p; ++i)
      if (!on[i]) dist += detail::sq(w[static_cast<Eigen::Index>(i)]);
    for (auto i : s) on[i] = false;
    if (dist < best.best_distance_sq) {
      best.best_distance_sq = dist;
      best.best_support = s;
      best.best_beta = SparseVector(p, s, std::vector<double>(proj.beta.data(), proj.beta.data() + k));
    }
  });
  return best;
}

}  // namespace sparseproj
