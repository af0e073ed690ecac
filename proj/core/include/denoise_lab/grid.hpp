#pragma once

#include "denoise_lab/models.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace denoise_lab::models {

/// Uniformly sampled 1D density on [lo, hi].
///
/// Invariants (checked on construction): at least 64 points, positive spacing,
/// nonnegative values, trapezoidal mass within 1e-4 of one.
class Grid1D {
 public:
  static constexpr std::size_t kMinPoints = 64;
  static constexpr double kMassTolerance = 1e-4;

  Grid1D(double lo, double hi, std::vector<double> values);

  static Grid1D sample(double lo, double hi, std::size_t n,
                       const std::function<double(double)>& density);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t size() const noexcept { return values_.size(); }
  double spacing() const noexcept { return spacing_; }
  double x(std::size_t i) const noexcept { return lo_ + spacing_ * static_cast<double>(i); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double integral() const;
  // Trapezoidal integral of values over the knots with x(i) < a or x(i) > b.
  double mass_outside(double a, double b) const;
  // Trapezoidal E[x²] under the grid density.
  double second_moment() const;

 private:
  double lo_;
  double hi_;
  double spacing_;
  std::vector<double> values_;
};

/// Natural cubic interpolating spline on uniformly spaced knots.
class UniformCubicSpline {
 public:
  UniformCubicSpline(double lo, double spacing, std::vector<double> knots);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return lo_ + spacing_ * static_cast<double>(y_.size() - 1); }
  bool contains(double x) const noexcept { return x >= lo() && x <= hi(); }

  // Derivative orders 0..3; the third derivative is piecewise constant.
  double eval(double x, int order = 0) const;

 private:
  double lo_;
  double spacing_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

// q(y) = ∫ p(y − sqrt(2η) z) φ(z) dz by trapezoidal quadrature over the noise support
// (Gaussian truncated at ±8). p between knots comes from a cubic spline; p is zero off-grid.
// Output lives on the input grid and is renormalized to unit mass.
Grid1D convolve_density_1d(const Grid1D& p, const NoiseModel& noise, double eta);

}  // namespace denoise_lab::models
