#pragma once

#include "denoise_lab/types.hpp"

#include <cstddef>
#include <vector>

namespace denoise_lab::models {

struct GaussianComponent {
  double weight = 1.0;
  Vector mean;
  Matrix covariance;
};

// Value and derivatives of a density (not its logarithm) at one point.
struct DensityJet {
  double value = 0.0;
  Vector gradient;        // ∇q
  Matrix hessian;         // ∇²q
  Vector grad_laplacian;  // ∇Δq
  double bilaplacian = 0.0;  // Δ²q
};

/// Weighted mixture of full-covariance Gaussians.
///
/// Immutable after construction. The constructor validates weights (positive,
/// summing to one within 1e-12), covariance symmetry (1e-12) and positive
/// definiteness, and caches one Cholesky factor and precision per component.
/// All evaluation happens in the log domain so densities far in the tails are
/// reported as tiny positive numbers rather than spurious zeros.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components);

  static GaussianMixture gaussian(Vector mean, Matrix covariance);
  static GaussianMixture standard_normal(int dim);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<GaussianComponent>& components() const noexcept { return components_; }
  const GaussianComponent& component(std::size_t k) const { return components_.at(k); }
  const Matrix& precision(std::size_t k) const { return cache_.at(k).precision; }
  const Matrix& cholesky_factor(std::size_t k) const { return cache_.at(k).lower; }

  double log_density(const Vector& x) const;
  double density(const Vector& x) const;

  // out[k] = log w_k + log N(x; μ_k, Σ_k). Responsibilities are softmax(out).
  void component_log_terms(const Vector& x, Eigen::Ref<Vector> out) const;

  // Analytic derivatives of the density up to fourth order (contracted).
  DensityJet jet(const Vector& x) const;

  Vector mean() const;
  // E[X Xᵀ] = Σ_k w_k (Σ_k + μ_k μ_kᵀ)
  Matrix second_moment() const;

 private:
  struct Cached {
    Matrix lower;      // Cholesky factor L, Σ = L Lᵀ
    Matrix precision;  // Σ⁻¹
    double log_normalizer = 0.0;  // log w − d/2 log 2π − ½ log det Σ
  };

  void check_dim(const Vector& x) const;

  int dim_ = 0;
  std::vector<GaussianComponent> components_;
  std::vector<Cached> cache_;
};

double mixture_density(const GaussianMixture& model, const Vector& x);

// i.i.d. draws, component by weight then μ + L·N(0, I).
SampleMatrix mixture_sample(const GaussianMixture& model, std::size_t n, Rng& rng);

// Closed-form law of X + sqrt(2η) Z under isotropic Gaussian Z: Σ_k → Σ_k + 2η I.
GaussianMixture noisy_mixture(const GaussianMixture& model, double eta);

enum class NoiseKind { GaussianIso, UniformIso };

/// Symmetric noise with identity covariance. Moment metadata is exact, not sampled.
class NoiseModel {
 public:
  NoiseModel(NoiseKind kind, int dim);

  static NoiseModel gaussian(int dim) { return {NoiseKind::GaussianIso, dim}; }
  static NoiseModel uniform(int dim) { return {NoiseKind::UniformIso, dim}; }

  NoiseKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  // E[Z_i⁴]: 3 for Gaussian, 9/5 for uniform on [−√3, √3].
  double fourth_moment() const noexcept;
  // E[Z_i² Z_j²] for i ≠ j; 1 for both kinds since coordinates are independent.
  double cross_fourth_moment() const noexcept { return 1.0; }
  // Half-width of the per-coordinate support, infinity for Gaussian.
  double support_half_width() const noexcept;

 private:
  NoiseKind kind_;
  int dim_;
};

SampleMatrix noise_sample(const NoiseModel& noise, std::size_t n, Rng& rng);

struct Assumption2Report {
  bool satisfies_i = false;
  bool satisfies_ii = false;
  double fourth_moment = 0.0;
};

Assumption2Report assumption2_report(const NoiseModel& noise);

}  // namespace denoise_lab::models
