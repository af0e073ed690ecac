#pragma once

#include "denoise_lab/grid.hpp"
#include "denoise_lab/models.hpp"
#include "denoise_lab/types.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace denoise_lab::score {

/// Everything a denoiser needs to know about the noisy law q.
///
/// score(y)          = ∇ log q(y)
/// score_jacobian(y) = ∇² log q(y), symmetric
/// grad_laplacian(y) = ∇ Δ log q(y)
///
/// Implementations are immutable and pure; sharing one oracle across threads is safe.
class ScoreOracle {
 public:
  virtual ~ScoreOracle() = default;

  virtual int dim() const = 0;
  virtual Vector score(const Vector& y) const = 0;
  virtual Matrix score_jacobian(const Vector& y) const = 0;
  virtual Vector grad_laplacian(const Vector& y) const = 0;
};

using OraclePtr = std::shared_ptr<const ScoreOracle>;

// Analytic log-mixture derivatives. Responsibilities are computed in the log domain.
Vector mixture_score(const models::GaussianMixture& q, const Vector& y);
Matrix mixture_score_jacobian(const models::GaussianMixture& q, const Vector& y);
// Δ log q = tr ∇² log q, cheaper than the full Jacobian.
double mixture_log_laplacian(const models::GaussianMixture& q, const Vector& y);
// Richardson-extrapolated central differences (h, h/2) of the Hessian trace,
// h = 1e-3 (1 + ‖y‖).
Vector mixture_grad_laplacian(const models::GaussianMixture& q, const Vector& y);

class MixtureOracle final : public ScoreOracle {
 public:
  explicit MixtureOracle(models::GaussianMixture q) : q_(std::move(q)) {}

  int dim() const override { return q_.dim(); }
  Vector score(const Vector& y) const override { return mixture_score(q_, y); }
  Matrix score_jacobian(const Vector& y) const override { return mixture_score_jacobian(q_, y); }
  Vector grad_laplacian(const Vector& y) const override { return mixture_grad_laplacian(q_, y); }

  double density(const Vector& y) const { return q_.density(y); }
  const models::GaussianMixture& mixture() const noexcept { return q_; }

 private:
  models::GaussianMixture q_;
};

std::shared_ptr<const MixtureOracle> mixture_oracle(models::GaussianMixture q);

using VectorField = std::function<Vector(const Vector&)>;

// Wraps an arbitrary score field. Jacobian by central differences, symmetrized as
// (J + Jᵀ)/2; grad_laplacian by central differences of the Jacobian trace.
OraclePtr fd_oracle(VectorField score_fn, int dim, double h);

/// Score oracle for a density known only on a 1D grid.
///
/// The first three derivatives of log q are taken at every knot with 8th-order
/// central differences and each is interpolated by its own natural cubic spline,
/// so every returned derivative is C². Queries are accepted only on the central
/// 90% of the grid.
class GridOracle1D final : public ScoreOracle {
 public:
  explicit GridOracle1D(const models::Grid1D& q);

  int dim() const override { return 1; }
  Vector score(const Vector& y) const override;
  Matrix score_jacobian(const Vector& y) const override;
  Vector grad_laplacian(const Vector& y) const override;

  double density(double y) const;
  double trusted_lo() const noexcept { return trusted_lo_; }
  double trusted_hi() const noexcept { return trusted_hi_; }

 private:
  GridOracle1D(const models::Grid1D& q, double trusted_lo, double trusted_hi);
  GridOracle1D(double lo, double h, double trusted_lo, double trusted_hi,
               const std::vector<double>& log_q);

  double checked(const Vector& y) const;

  double trusted_lo_;
  double trusted_hi_;
  models::UniformCubicSpline log_q_;
  models::UniformCubicSpline d1_;
  models::UniformCubicSpline d2_;
  models::UniformCubicSpline d3_;
};

std::shared_ptr<const GridOracle1D> grid_oracle_1d(const models::Grid1D& q);

}  // namespace denoise_lab::score
