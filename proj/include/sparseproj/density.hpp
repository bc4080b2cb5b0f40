#pragma once

// Sparse kernel density estimation: weights on Gaussian kernels centred at
// the samples, fitted by minimizing the integrated squared error criterion
// beta^T Sigma beta - c^T beta over the simplex (optionally k-sparse).

#include "sparseproj/core.hpp"
#include "sparseproj/projections.hpp"
#include "sparseproj/rng.hpp"
#include "sparseproj/solver.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace sparseproj {

/// Normalized Gaussian density with standard deviation sigma, evaluated at x - y.
inline double gaussian_kernel(double x, double y, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("gaussian_kernel: sigma must be > 0");
  const double z = (x - y) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Product-form kernel for p-dimensional points.
inline double gaussian_kernel(const DenseVector& x, const DenseVector& y, double sigma) {
  if (x.size() != y.size()) throw DomainError("gaussian_kernel: dimension mismatch");
  double v = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) v *= gaussian_kernel(x[i], y[i], sigma);
  return v;
}

struct KernelModel {
  std::vector<double> centers;
  double sigma = 1.0;
  DenseVector weights;

  IndexSet support() const {
    IndexSet s;
    for (Eigen::Index i = 0; i < weights.size(); ++i)
      if (weights[i] != 0.0) s.push_back(static_cast<std::size_t>(i));
    return s;
  }
};

struct IseQuadratic {
  RealMatrix sigma;  // Sigma_ij = kappa_{sqrt(2) sigma}(x_i, x_j)
  DenseVector c;     // c_i = mean over j != i of kappa_sigma(x_i, x_j)
};

inline IseQuadratic build_ise_quadratic(const std::vector<double>& samples, double sigma) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < 2) throw DomainError("build_ise_quadratic: need at least two samples");
  if (!(sigma > 0.0)) throw DomainError("build_ise_quadratic: sigma must be > 0");
  const double wide = std::sqrt(2.0) * sigma;
  IseQuadratic q{RealMatrix(n, n), DenseVector::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = samples[static_cast<std::size_t>(i)];
    q.sigma(i, i) = gaussian_kernel(xi, xi, wide);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double xj = samples[static_cast<std::size_t>(j)];
      q.sigma(i, j) = q.sigma(j, i) = gaussian_kernel(xi, xj, wide);
      const double k = gaussian_kernel(xi, xj, sigma);
      q.c[i] += k;
      q.c[j] += k;
    }
  }
  q.c /= static_cast<double>(n - 1);
  return q;
}

struct DensityFit {
  KernelModel model;
  SolveTrace trace;
  double objective = 0.0;  // beta^T Sigma beta - c^T beta at the returned weights
};

/// Minimizes beta^T Sigma beta - c^T beta over the unit simplex (SimplexConvex)
/// or its k-sparse subset (SimplexSparse, lambda = 1). Default step is
/// 1 / (2 lambda_max(Sigma)).
inline DensityFit estimate_density(const std::vector<double>& samples, double sigma,
                                   const ConstraintSpec& spec, SolverConfig config,
                                   const IseQuadratic* prebuilt = nullptr,
                                   std::optional<double> lambda_max = std::nullopt) {
  if (spec.kind != ConstraintKind::SimplexConvex && spec.kind != ConstraintKind::SimplexSparse)
    throw DomainError("estimate_density: constraint must be a (sparse) simplex");
  if (spec.lambda != 1.0) throw DomainError("estimate_density: weights must sum to one");
  spec.validate(samples.size());
  const IseQuadratic q = prebuilt ? *prebuilt : build_ise_quadratic(samples, sigma);
  QuadraticFormLoss loss(q.sigma, q.c, lambda_max);
  const auto proj = make_projector(spec);
  auto res = minimize_projected<DenseVector>(loss, proj, config);
  DensityFit fit;
  fit.model = KernelModel{samples, sigma, res.solution};
  fit.objective = loss.value(res.solution);
  fit.trace = std::move(res.trace);
  return fit;
}

/// Uniform weights 1/n.
inline KernelModel parzen(const std::vector<double>& samples, double sigma) {
  if (samples.empty()) throw DomainError("parzen: no samples");
  if (!(sigma > 0.0)) throw DomainError("parzen: sigma must be > 0");
  const auto n = static_cast<Eigen::Index>(samples.size());
  return KernelModel{samples, sigma, DenseVector::Constant(n, 1.0 / static_cast<double>(n))};
}

/// Five-component mixture (1/5) sum_i N(mean_i, sd_i^2), sd_i = (7/9)^i and
/// mean_i = 14 (sd_i - 1), i = 1..5.
struct FiveComponentMixture {
  static constexpr int components = 5;
  static double sd(int i) { return std::pow(7.0 / 9.0, i); }
  static double mean(int i) { return 14.0 * (sd(i) - 1.0); }

  static double pdf(double x) {
    double v = 0.0;
    for (int i = 1; i <= components; ++i) v += gaussian_kernel(x, mean(i), sd(i));
    return v / components;
  }

  static double overall_mean() {
    double m = 0.0;
    for (int i = 1; i <= components; ++i) m += mean(i);
    return m / components;
  }

  static std::vector<double> means() {
    std::vector<double> out;
    for (int i = 1; i <= components; ++i) out.push_back(mean(i));
    return out;
  }
};

/// Draws n points: uniform component, then a Gaussian draw from it.
inline std::vector<double> sample_paper_mixture(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_paper_mixture: n must be >= 1");
  Rng rng(seed);
  std::uniform_int_distribution<int> comp(1, FiveComponentMixture::components);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) {
    const int i = comp(rng);
    x = FiveComponentMixture::mean(i) + FiveComponentMixture::sd(i) * normal(rng);
  }
  return out;
}

inline DenseVector evaluate_pdf(const KernelModel& model, const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("evaluate_pdf: empty grid");
  DenseVector out = DenseVector::Zero(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index i = 0; i < model.weights.size(); ++i) {
    const double w = model.weights[i];
    if (w == 0.0) continue;
    const double center = model.centers[static_cast<std::size_t>(i)];
    for (std::size_t g = 0; g < grid.size(); ++g)
      out[static_cast<Eigen::Index>(g)] += w * gaussian_kernel(grid[g], center, model.sigma);
  }
  return out;
}

/// Trapezoid-rule integral of (f - g)^2 over an increasing grid.
inline double trapezoid_ise(const DenseVector& f, const DenseVector& g, const std::vector<double>& grid) {
  if (grid.size() < 2 || f.size() != g.size() || static_cast<std::size_t>(f.size()) != grid.size())
    throw DomainError("trapezoid_ise: need matching inputs with at least two grid points");
  double total = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = grid[i] - grid[i - 1];
    if (!(h > 0.0)) throw DomainError("trapezoid_ise: grid must be strictly increasing");
    const auto a = static_cast<Eigen::Index>(i - 1), b = static_cast<Eigen::Index>(i);
    total += 0.5 * h * (detail::sq(f[a] - g[a]) + detail::sq(f[b] - g[b]));
  }
  return total;
}

template <typename Pdf>
double ise_against(const KernelModel& model, Pdf&& reference_pdf, const std::vector<double>& grid) {
  const DenseVector est = evaluate_pdf(model, grid);
  DenseVector ref(est.size());
  for (std::size_t i = 0; i < grid.size(); ++i) ref[static_cast<Eigen::Index>(i)] = reference_pdf(grid[i]);
  return trapezoid_ise(est, ref, grid);
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw DomainError("uniform_grid: need hi > lo and >= 2 points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

/// Total weight outside the `keep` largest coefficients.
inline double mass_outside_top(const DenseVector& weights, std::size_t keep) {
  std::vector<double> w(weights.data(), weights.data() + weights.size());
  std::sort(w.begin(), w.end(), std::greater<>());
  double rest = 0.0;
  for (std::size_t i = keep; i < w.size(); ++i) rest += w[i];
  return rest;
}

}  // namespace sparseproj
