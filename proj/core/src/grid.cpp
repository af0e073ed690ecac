#include "denoise_lab/grid.hpp"

#include "denoise_lab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace denoise_lab::models {

namespace {

constexpr double kGaussianTruncation = 8.0;
constexpr std::size_t kGaussianNodes = 1601;
constexpr std::size_t kUniformNodes = 4001;

}  // namespace

Grid1D::Grid1D(double lo, double hi, std::vector<double> values)
    : lo_(lo), hi_(hi), spacing_(0.0), values_(std::move(values)) {
  if (values_.size() < kMinPoints) {
    throw ModelError("Grid1D: need at least 64 points, got " + std::to_string(values_.size()));
  }
  spacing_ = (hi_ - lo_) / static_cast<double>(values_.size() - 1);
  if (!(spacing_ > 0.0)) throw ModelError("Grid1D: hi must exceed lo");
  for (double v : values_) {
    if (!(v >= 0.0)) throw ModelError("Grid1D: density values must be nonnegative");
  }
  const double mass = integral();
  if (std::abs(mass - 1.0) > kMassTolerance) {
    throw ModelError("Grid1D: trapezoidal mass is " + std::to_string(mass) + ", expected 1");
  }
}

Grid1D Grid1D::sample(double lo, double hi, std::size_t n,
                      const std::function<double(double)>& density) {
  if (n < 2) throw ArgumentError("Grid1D::sample: n must be at least 2");
  std::vector<double> values(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) values[i] = density(lo + h * static_cast<double>(i));
  return Grid1D(lo, hi, std::move(values));
}

double Grid1D::integral() const {
  double s = 0.5 * (values_.front() + values_.back());
  for (std::size_t i = 1; i + 1 < values_.size(); ++i) s += values_[i];
  return s * spacing_;
}

double Grid1D::mass_outside(double a, double b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double xi = x(i);
    if (xi < a || xi > b) {
      const bool edge = i == 0 || i + 1 == values_.size();
      s += (edge ? 0.5 : 1.0) * values_[i];
    }
  }
  return s * spacing_;
}

double Grid1D::second_moment() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const bool edge = i == 0 || i + 1 == values_.size();
    s += (edge ? 0.5 : 1.0) * x(i) * x(i) * values_[i];
  }
  return s * spacing_;
}

UniformCubicSpline::UniformCubicSpline(double lo, double spacing, std::vector<double> knots)
    : lo_(lo), spacing_(spacing), y_(std::move(knots)) {
  const std::size_t n = y_.size();
  if (n < 4) throw ArgumentError("UniformCubicSpline: need at least 4 knots");
  if (!(spacing_ > 0.0)) throw ArgumentError("UniformCubicSpline: spacing must be positive");

  // Natural spline: M_0 = M_{n-1} = 0, interior rows M_{i-1} + 4 M_i + M_{i+1} = 6 Δ²y_i / h².
  m_.assign(n, 0.0);
  const std::size_t interior = n - 2;
  std::vector<double> diag(interior, 4.0);
  std::vector<double> rhs(interior);
  const double scale = 6.0 / (spacing_ * spacing_);
  for (std::size_t i = 0; i < interior; ++i) {
    rhs[i] = scale * (y_[i] - 2.0 * y_[i + 1] + y_[i + 2]);
  }
  for (std::size_t i = 1; i < interior; ++i) {
    const double w = 1.0 / diag[i - 1];
    diag[i] -= w;
    rhs[i] -= w * rhs[i - 1];
  }
  m_[interior] = rhs[interior - 1] / diag[interior - 1];
  for (std::size_t i = interior - 1; i-- > 0;) {
    m_[i + 1] = (rhs[i] - m_[i + 2]) / diag[i];
  }
}

double UniformCubicSpline::eval(double x, int order) const {
  const double h = spacing_;
  const std::size_t last = y_.size() - 2;
  const double u = (x - lo_) / h;
  const auto i = static_cast<std::size_t>(std::clamp(std::floor(u), 0.0, static_cast<double>(last)));
  const double a = lo_ + h * static_cast<double>(i + 1) - x;  // distance to right knot
  const double b = x - (lo_ + h * static_cast<double>(i));    // distance to left knot
  const double m0 = m_[i];
  const double m1 = m_[i + 1];
  const double y0 = y_[i];
  const double y1 = y_[i + 1];
  switch (order) {
    case 0:
      return (m0 * a * a * a + m1 * b * b * b) / (6.0 * h) + (y0 / h - m0 * h / 6.0) * a +
             (y1 / h - m1 * h / 6.0) * b;
    case 1:
      return (-m0 * a * a + m1 * b * b) / (2.0 * h) + (y1 - y0) / h - (m1 - m0) * h / 6.0;
    case 2:
      return (m0 * a + m1 * b) / h;
    case 3:
      return (m1 - m0) / h;
    default:
      throw ArgumentError("UniformCubicSpline::eval: order must be in [0, 3]");
  }
}

Grid1D convolve_density_1d(const Grid1D& p, const NoiseModel& noise, double eta) {
  if (noise.dim() != 1) throw ArgumentError("convolve_density_1d: noise must be one-dimensional");
  if (!(eta >= 0.0)) throw ArgumentError("convolve_density_1d: eta must be nonnegative");
  if (eta == 0.0) return p;

  const double scale = std::sqrt(2.0 * eta);
  const double margin = 4.0 * scale;
  if (2.0 * margin >= p.hi() - p.lo() ||
      p.mass_outside(p.lo() + margin, p.hi() - margin) >= 1e-6) {
    throw DomainError("convolve_density_1d: grid does not cover p with margin 4*sqrt(2*eta) = " +
                      std::to_string(margin));
  }

  // Quadrature nodes and trapezoid weights over the noise support.
  std::vector<double> nodes;
  std::vector<double> weights;
  if (noise.kind() == NoiseKind::GaussianIso) {
    const double dz = 2.0 * kGaussianTruncation / static_cast<double>(kGaussianNodes - 1);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < kGaussianNodes; ++k) {
      const double z = -kGaussianTruncation + dz * static_cast<double>(k);
      const bool edge = k == 0 || k + 1 == kGaussianNodes;
      nodes.push_back(z);
      weights.push_back((edge ? 0.5 : 1.0) * dz * norm * std::exp(-0.5 * z * z));
    }
  } else {
    const double a = noise.support_half_width();
    const double dz = 2.0 * a / static_cast<double>(kUniformNodes - 1);
    for (std::size_t k = 0; k < kUniformNodes; ++k) {
      const bool edge = k == 0 || k + 1 == kUniformNodes;
      nodes.push_back(-a + dz * static_cast<double>(k));
      weights.push_back((edge ? 0.5 : 1.0) * dz / (2.0 * a));
    }
  }

  const UniformCubicSpline spline(p.lo(), p.spacing(),
                                  std::vector<double>(p.values().begin(), p.values().end()));
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double y = p.x(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double x = y - scale * nodes[k];
      if (spline.contains(x)) acc += weights[k] * std::max(spline.eval(x), 0.0);
    }
    out[i] = acc;
  }

  double mass = 0.5 * (out.front() + out.back());
  for (std::size_t i = 1; i + 1 < out.size(); ++i) mass += out[i];
  mass *= p.spacing();
  for (double& v : out) v /= mass;
  return Grid1D(p.lo(), p.hi(), std::move(out));
}

}  // namespace denoise_lab::models
