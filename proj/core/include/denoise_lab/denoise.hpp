#pragma once

#include "denoise_lab/score.hpp"
#include "denoise_lab/types.hpp"

#include <string_view>

namespace denoise_lab::denoise {

enum class DenoiserKind { Identity, JamesStein, Bayes, FirstOrder, SecondOrder };

std::string_view to_string(DenoiserKind kind);
// Accepts the names produced by to_string ("identity", "bayes", "first_order", ...).
DenoiserKind denoiser_kind_from_string(std::string_view name);

/// A configured map T: ℝᵈ → ℝᵈ.
///
/// The noise level is carried only as η = σ²/2; σ² is derived where needed.
///   Identity     y
///   JamesStein   (1 − σ²(d−2)/‖y‖²) y           (d ≥ 3, no oracle)
///   Bayes        y + 2η ∇log q(y)
///   FirstOrder   y + η ∇log q(y)
///   SecondOrder  y + η ∇log q(y) + (η²/2) ∇g*(y)
class Denoiser {
 public:
  // Identity and JamesStein take no oracle; the others require one with matching dim.
  Denoiser(DenoiserKind kind, double eta, score::OraclePtr oracle, int dim);
  Denoiser(DenoiserKind kind, double eta, score::OraclePtr oracle);

  static Denoiser identity(int dim) { return {DenoiserKind::Identity, 0.0, nullptr, dim}; }
  static Denoiser james_stein(int dim, double eta) {
    return {DenoiserKind::JamesStein, eta, nullptr, dim};
  }

  DenoiserKind kind() const noexcept { return kind_; }
  double eta() const noexcept { return eta_; }
  double sigma_sq() const noexcept { return 2.0 * eta_; }
  int dim() const noexcept { return dim_; }
  const score::OraclePtr& oracle() const noexcept { return oracle_; }

  Vector apply(const Vector& y) const;
  Matrix jacobian(const Vector& y) const;

 private:
  void check_dim(const Vector& y) const;

  DenoiserKind kind_;
  double eta_;
  score::OraclePtr oracle_;
  int dim_;
};

inline Vector apply(const Denoiser& den, const Vector& y) { return den.apply(y); }
inline Matrix jacobian(const Denoiser& den, const Vector& y) { return den.jacobian(y); }

// ∇g* = −(∇²f* ∇f* + ∇Δf*) with f* = log q, g* = −(½‖∇f*‖² + Δf*).
Vector g_star_grad(const score::ScoreOracle& oracle, const Vector& y);

// Row-wise apply. Errors are rethrown with the offending row index.
SampleMatrix push_forward(const Denoiser& den, const SampleMatrix& samples);

struct SmallNoiseReport {
  double min_eig = 0.0;
  bool ok = false;
};

// Smallest eigenvalue of the Jacobian over the grid rows; ok iff positive.
SmallNoiseReport check_small_noise(const Denoiser& den, const SampleMatrix& grid);

// Monte-Carlo E‖∇f*(Y)‖² and E‖∇g*(Y)‖³ over the given noisy samples.
struct IntegrabilityMoments {
  double score_sq = 0.0;
  double g_grad_cubed = 0.0;
};

IntegrabilityMoments integrability_moments(const score::ScoreOracle& oracle,
                                           const SampleMatrix& samples);

}  // namespace denoise_lab::denoise
