#pragma once

#include "denoise_lab/models.hpp"
#include "denoise_lab/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace denoise_lab::verify {

struct CheckResult {
  std::string name;
  double max_residual = 0.0;
  double threshold = 0.0;
  std::optional<double> slope;
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  std::optional<double> r2;
  // Per-part maxima when one check covers several identities.
  std::vector<std::pair<std::string, double>> parts;
  bool pass = false;

  static std::string csv_header();
  std::string csv_row() const;
};

inline constexpr double kMinR2 = 0.98;

// |det(I + ηA) − (1 + η trA + (η²/2)((trA)² − tr A²))| over etas. For d ≤ 2 the
// expansion is exact and the check is absolute; otherwise the slope must lie in [2.9, 3.1].
CheckResult check_det_expansion(const Matrix& a, const std::vector<double>& etas);

// Max relative residual of the four identities for f = log q, threshold 1e-5.
CheckResult check_log_density_identities(const models::GaussianMixture& q,
                                         const SampleMatrix& points);

// ∇·(Δq ∇f − ∇²f ∇q) by Richardson central differences (step 1e-3) against the
// analytic quadratic form; threshold 1e-4.
CheckResult check_third_order_identity(const models::GaussianMixture& q,
                                       const SampleMatrix& points);

// Sup-norm residuals of the first- and second-order expansions of the noisy density
// on the [−10, 10], n = 4096 grid. Returns the two checks, first order then second.
std::vector<CheckResult> check_convolution_expansion(const models::GaussianMixture& p,
                                                     const models::NoiseModel& noise,
                                                     const std::vector<double>& etas);

// q∇f = ∇q and q∇g* = ∇²f ∇q + Δq ∇f − ∇Δq; threshold 1e-4.
CheckResult check_denoising_equations(const models::GaussianMixture& q,
                                      const SampleMatrix& points);

// Shipped fixtures.
models::GaussianMixture mixture_1d();  // 0.4 N(−1, 0.8) + 0.6 N(1.2, 1)
models::GaussianMixture mixture_2d();  // equal mixture of the two correlated Gaussians
// Points drawn from the mixture itself, so they sit well inside its 6-sigma region.
SampleMatrix check_points(const models::GaussianMixture& q, std::size_t n, std::uint64_t seed);

std::vector<CheckResult> default_battery();

}  // namespace denoise_lab::verify
