#include "sparseproj/oracle.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace sparseproj {
namespace {

DenseVector vec(std::initializer_list<double> v) {
  DenseVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(Binomial, SmallValues) {
  EXPECT_EQ(binomial(4, 2), 6u);
  EXPECT_EQ(binomial(10, 0), 1u);
  EXPECT_EQ(binomial(10, 10), 1u);
  EXPECT_EQ(binomial(3, 5), 0u);
  EXPECT_EQ(binomial(60, 30), 118264581564861424ull);
}

TEST(Binomial, Saturates) {
  EXPECT_EQ(binomial(200, 100), std::numeric_limits<std::uint64_t>::max());
}

TEST(Combinations, LexicographicAndComplete) {
  std::vector<IndexSet> seen;
  for_each_combination(4, 2, [&](const IndexSet& s) { seen.push_back(s); });
  const std::vector<IndexSet> expected = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(seen, expected);
}

TEST(Combinations, MatchesRecursiveEnumeration) {
  for (std::size_t p = 1; p <= 8; ++p) {
    for (std::size_t k = 1; k <= p; ++k) {
      std::vector<IndexSet> mine, ref;
      for_each_combination(p, k, [&](const IndexSet& s) { mine.push_back(s); });
      IndexSet cur;
      testing::subsets(p, k, 0, cur, [&](const IndexSet& s) { ref.push_back(s); });
      EXPECT_EQ(mine, ref);
    }
  }
}

TEST(Oracle, SimplexExample) {
  const auto r = oracle_project(vec({0.5, 0.4, 0.3, -0.2}), ConstraintSpec::simplex_sparse(2, 1.0));
  EXPECT_EQ(r.best_support, (IndexSet{0, 1}));
  EXPECT_NEAR(r.best_distance_sq, 0.135, 1e-15);
  EXPECT_EQ(r.enumerated, 6u);
}

TEST(Oracle, HyperplaneExample) {
  const auto r = oracle_project(vec({3, 1, -1}), ConstraintSpec::hyperplane_sparse(2, 0.0));
  EXPECT_EQ(r.best_support, (IndexSet{0, 2}));
  EXPECT_EQ(r.best_beta.to_dense(), vec({2, 0, -2}));
  EXPECT_DOUBLE_EQ(r.best_distance_sq, 3.0);
  EXPECT_EQ(r.enumerated, 3u);
}

TEST(Oracle, FullSupportEqualsConvexProjection) {
  const DenseVector w = vec({0.2, -1.0, 3.0, 0.7});
  const auto s = oracle_project(w, ConstraintSpec::simplex_sparse(4, 2.0));
  EXPECT_EQ(s.enumerated, 1u);
  EXPECT_EQ(s.best_beta.to_dense(), project_simplex(w, 2.0).beta);
  const auto h = oracle_project(w, ConstraintSpec::hyperplane_sparse(4, -1.0));
  EXPECT_EQ(h.best_beta.to_dense(), project_hyperplane(w, -1.0).beta);
}

TEST(Oracle, LexicographicTieBreak) {
  // Every singleton is equally far: the first one wins.
  const auto r = oracle_project(vec({1, 1, 1}), ConstraintSpec::hyperplane_sparse(1, 1.0));
  EXPECT_EQ(r.best_support, (IndexSet{0}));
}

TEST(Oracle, BudgetRefusalNamesBound) {
  const DenseVector w = DenseVector::Ones(30);
  try {
    oracle_project(w, ConstraintSpec::simplex_sparse(15, 1.0));
    FAIL() << "expected BudgetError";
  } catch (const BudgetError& e) {
    EXPECT_NE(std::string(e.what()).find("1000000"), std::string::npos);
  }
  OracleOptions tight{5};
  EXPECT_THROW(oracle_project(vec({1, 2, 3, 4}), ConstraintSpec::simplex_sparse(2, 1.0), tight), BudgetError);
  OracleOptions exact{6};
  EXPECT_NO_THROW(oracle_project(vec({1, 2, 3, 4}), ConstraintSpec::simplex_sparse(2, 1.0), exact));
}

TEST(Oracle, RejectsOtherKindsAndBadK) {
  const DenseVector w = vec({1, 2, 3});
  EXPECT_THROW(oracle_project(w, ConstraintSpec::simplex_convex(1.0)), DomainError);
  EXPECT_THROW(oracle_project(w, ConstraintSpec::sparsity_only(2)), DomainError);
  EXPECT_THROW(oracle_project(w, ConstraintSpec::simplex_sparse(4, 1.0)), DomainError);
  EXPECT_THROW(oracle_project(w, ConstraintSpec::simplex_sparse(0, 1.0)), DomainError);
  EXPECT_THROW(oracle_project(w, ConstraintSpec::simplex_sparse(2, -1.0)), DomainError);
}

TEST(Oracle, AgreesWithGreedyAndReference) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 400; ++t) {
    const std::size_t p = 2 + t % 11;
    const std::size_t k = 1 + t % std::min<std::size_t>(p, 5);
    const DenseVector w = testing::draw_vector(p, static_cast<testing::EntryDistribution>(t % 4), rng);
    for (double lambda : {-1.0, 0.0, 0.5, 1.0, 10.0}) {
      const auto h = oracle_project(w, ConstraintSpec::hyperplane_sparse(k, lambda));
      EXPECT_EQ(h.enumerated, binomial(p, k));
      EXPECT_NEAR(h.best_distance_sq, gshp(w, k, lambda).distance_sq, 1e-9 * (1.0 + h.best_distance_sq));
      EXPECT_NEAR(h.best_distance_sq, testing::brute_force_distance(w, k, lambda, false), 1e-9 * (1.0 + h.best_distance_sq));
      EXPECT_NEAR(h.best_beta.sum(), lambda, 1e-10);
      if (lambda > 0.0) {
        const auto s = oracle_project(w, ConstraintSpec::simplex_sparse(k, lambda));
        EXPECT_NEAR(s.best_distance_sq, gssp(w, k, lambda).distance_sq, 1e-9 * (1.0 + s.best_distance_sq));
        for (double v : s.best_beta.values) EXPECT_GE(v, 0.0);
        EXPECT_NEAR(s.best_beta.sum(), lambda, 1e-10);
      }
    }
  }
}

TEST(Oracle, MonotoneInK) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const DenseVector w = testing::draw_vector(8, testing::EntryDistribution::Gaussian, rng);
    double prev_s = std::numeric_limits<double>::infinity(), prev_h = prev_s;
    for (std::size_t k = 1; k <= 8; ++k) {
      const double ds = oracle_project(w, ConstraintSpec::simplex_sparse(k, 1.0)).best_distance_sq;
      const double dh = oracle_project(w, ConstraintSpec::hyperplane_sparse(k, -0.3)).best_distance_sq;
      EXPECT_LE(ds, prev_s + 1e-12);
      EXPECT_LE(dh, prev_h + 1e-12);
      prev_s = ds;
      prev_h = dh;
    }
  }
}

}  // namespace
}  // namespace sparseproj
