#pragma once

#include "denoise_lab/denoise.hpp"
#include "denoise_lab/models.hpp"
#include "denoise_lab/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace denoise_lab::metrics {

using DensityFn = std::function<double(const Vector&)>;

/// Exact order-p Wasserstein distance between two 1D empirical measures via the
/// sorted (quantile) coupling. When the sizes differ, the smaller set is
/// resampled with replacement up to the larger size using `seed`.
double wasserstein_1d(std::span<const double> a, std::span<const double> b, int p,
                      std::uint64_t seed = 0);
double wasserstein_1d(const SampleMatrix& a, const SampleMatrix& b, int p, std::uint64_t seed = 0);

struct SinkhornOptions {
  // Target regularization; 0 selects 0.01 * median of the cross cost matrix.
  double epsilon = 0.0;
  int max_iter = 2000;
  // L1 violation of the column marginal at which the final-ε loop stops.
  double tolerance = 1e-6;
  // Geometric ε-annealing factor, starting from the largest cost.
  double scaling = 0.5;
};

struct SinkhornResult {
  double value = 0.0;  // sqrt of the debiased divergence, clipped at zero
  double divergence = 0.0;
  double epsilon = 0.0;
  int iterations = 0;  // total over the three transport problems
  bool converged = false;
};

/// Debiased entropic optimal transport (Sinkhorn divergence) between two uniformly
/// weighted point clouds with squared-Euclidean cost, computed with log-domain
/// updates. Non-convergence is reported through `converged`; the value is still
/// returned.
SinkhornResult sinkhorn_w2(const SampleMatrix& a, const SampleMatrix& b,
                           const SinkhornOptions& options = {});

/// Energy distance D = sqrt(max(D², 0)) with
/// D² = 2 E‖a − b‖ − E‖a − a'‖ − E‖b − b'‖, diagonal pairs included in the
/// within-set means. One-dimensional inputs use an O(n log n) sorted path.
double energy_distance(const SampleMatrix& a, const SampleMatrix& b);

// Relative Frobenius error ‖M − R‖ / ‖R‖ of two second-moment matrices.
double relative_second_moment_error(const Matrix& moment, const Matrix& reference);
// Same, with M the empirical E[T Tᵀ] of `denoised` and R = E[X Xᵀ] of the mixture.
double second_moment_error(const SampleMatrix& denoised, const models::GaussianMixture& reference);
Matrix empirical_second_moment(const SampleMatrix& samples);

/// sup over grid rows of |q(y) − p(T(y)) det ∇T(y)|.
/// Throws AssumptionViolation naming the point when a determinant is not positive.
double ma_residual(const denoise::Denoiser& den, const DensityFn& p, const DensityFn& q,
                   const SampleMatrix& grid);

/// Smooth compactly supported test function
///   m(x) = amplitude · e · exp(−1 / (1 − u)),  u = ‖(x − center)/radius‖² < 1,
/// zero elsewhere, so that m(center) = amplitude.
struct BumpFunction {
  Vector center;
  double radius = 1.0;
  double amplitude = 1.0;
};

double bump_eval(const BumpFunction& m, const Vector& x);
Vector bump_grad(const BumpFunction& m, const Vector& x);
Matrix bump_hess(const BumpFunction& m, const Vector& x);

struct QuadratureGrid {
  double lo = -12.0;
  double hi = 12.0;
  std::size_t points = (std::size_t{1} << 15) + 1;
};

/// ∫ m(T(y)) q(y) dy − ∫ m(x) p(x) dx on one shared trapezoidal grid (d = 1).
/// The integrands are C^∞ and vanish to all orders at the ends of their support,
/// so the trapezoidal rule converges spectrally. Throws DomainError when m or
/// m∘T is not supported inside the grid.
double moment_error_quadrature_1d(const BumpFunction& m, const denoise::Denoiser& den,
                                  const DensityFn& p, const DensityFn& q,
                                  const QuadratureGrid& grid = {});

// Trapezoidal ∫ f over the grid; shared by the leading-term check.
double trapezoid_1d(const std::function<double(double)>& f, const QuadratureGrid& grid);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least-squares fit of log(error) against log(eta). Needs at least four positive pairs.
SlopeFit fit_slope(std::span<const double> etas, std::span<const double> errors);

struct MetricsReport {
  double wasserstein = 0.0;
  double energy = 0.0;
  double second_moment_rel_err = 0.0;
  std::optional<double> ma_residual;
  std::optional<double> moment_quad_err;

  static std::string csv_header();
  // Empty fields for absent optionals; doubles in shortest round-trip form.
  std::string csv_row() const;
};

// Shortest decimal that round-trips; locale independent.
std::string format_double(double value);

}  // namespace denoise_lab::metrics
