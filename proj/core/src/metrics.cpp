#include "denoise_lab/metrics.hpp"

#include "denoise_lab/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace denoise_lab::metrics {

namespace {

std::vector<double> column_copy(const SampleMatrix& s) {
  if (s.cols() != 1) throw ArgumentError("expected one-dimensional samples (one column)");
  return {s.data(), s.data() + s.rows()};
}

std::vector<double> resample(std::span<const double> src, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, src.size() - 1);
  std::vector<double> out(n);
  for (auto& v : out) v = src[pick(rng)];
  return out;
}

// Σ_{i,j} |x_i − x_j| for sorted x.
double within_abs_sum(const std::vector<double>& x) {
  const auto n = static_cast<double>(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i] * (2.0 * static_cast<double>(i) - n + 1.0);
  }
  return 2.0 * acc;
}

// Σ_{i,j} |a_i − b_j| for sorted a, b.
double cross_abs_sum(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> prefix(b.size() + 1, 0.0);
  for (std::size_t j = 0; j < b.size(); ++j) prefix[j + 1] = prefix[j] + b[j];
  const double total = prefix.back();
  const auto m = static_cast<double>(b.size());
  double acc = 0.0;
  std::size_t k = 0;
  for (double ai : a) {
    while (k < b.size() && b[k] < ai) ++k;
    const auto below = static_cast<double>(k);
    acc += ai * below - prefix[k] + (total - prefix[k]) - ai * (m - below);
  }
  return acc;
}

double energy_1d(const SampleMatrix& a, const SampleMatrix& b) {
  auto x = column_copy(a);
  auto y = column_copy(b);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  const double d2 =
      2.0 * cross_abs_sum(x, y) / (n * m) - within_abs_sum(x) / (n * n) - within_abs_sum(y) / (m * m);
  return std::sqrt(std::max(d2, 0.0));
}

double mean_pair_distance(const SampleMatrix& a, const SampleMatrix& b) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    acc += (b.rowwise() - a.row(i)).rowwise().norm().sum();
  }
  return acc / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

}  // namespace

double wasserstein_1d(std::span<const double> a, std::span<const double> b, int p,
                      std::uint64_t seed) {
  if (a.empty() || b.empty()) throw ArgumentError("wasserstein_1d: empty sample");
  if (p < 1) throw ArgumentError("wasserstein_1d: order must be >= 1");
  std::vector<double> x;
  std::vector<double> y;
  if (a.size() == b.size()) {
    x.assign(a.begin(), a.end());
    y.assign(b.begin(), b.end());
  } else if (a.size() < b.size()) {
    x = resample(a, b.size(), seed);
    y.assign(b.begin(), b.end());
  } else {
    x.assign(a.begin(), a.end());
    y = resample(b, a.size(), seed);
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i] - y[i]), p);
  return std::pow(acc / static_cast<double>(x.size()), 1.0 / p);
}

double wasserstein_1d(const SampleMatrix& a, const SampleMatrix& b, int p, std::uint64_t seed) {
  const auto x = column_copy(a);
  const auto y = column_copy(b);
  return wasserstein_1d(std::span<const double>(x), std::span<const double>(y), p, seed);
}

double energy_distance(const SampleMatrix& a, const SampleMatrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw ArgumentError("energy_distance: empty sample");
  if (a.cols() != b.cols()) throw ArgumentError("energy_distance: dimension mismatch");
  if (a.cols() == 1) return energy_1d(a, b);
  const double d2 = 2.0 * mean_pair_distance(a, b) - mean_pair_distance(a, a) -
                    mean_pair_distance(b, b);
  return std::sqrt(std::max(d2, 0.0));
}

Matrix empirical_second_moment(const SampleMatrix& samples) {
  if (samples.rows() == 0) throw ArgumentError("empirical_second_moment: empty sample");
  return (samples.transpose() * samples) / static_cast<double>(samples.rows());
}

double relative_second_moment_error(const Matrix& moment, const Matrix& reference) {
  if (moment.rows() != reference.rows() || moment.cols() != reference.cols()) {
    throw ArgumentError("relative_second_moment_error: shape mismatch");
  }
  const double scale = reference.norm();
  if (scale == 0.0) throw DomainError("relative_second_moment_error: zero reference moment");
  return (moment - reference).norm() / scale;
}

double second_moment_error(const SampleMatrix& denoised, const models::GaussianMixture& reference) {
  if (denoised.cols() != reference.dim()) {
    throw ArgumentError("second_moment_error: dimension mismatch");
  }
  return relative_second_moment_error(empirical_second_moment(denoised),
                                      reference.second_moment());
}

double ma_residual(const denoise::Denoiser& den, const DensityFn& p, const DensityFn& q,
                   const SampleMatrix& grid) {
  if (grid.rows() == 0) throw ArgumentError("ma_residual: empty grid");
  if (grid.cols() != den.dim()) throw ArgumentError("ma_residual: dimension mismatch");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    const Vector y = grid.row(i).transpose();
    const double det = den.jacobian(y).determinant();
    if (!(det > 0.0)) {
      std::ostringstream msg;
      msg << "ma_residual: det of the denoiser Jacobian is " << det << " at y = ("
          << y.transpose() << ")";
      throw AssumptionViolation(msg.str());
    }
    worst = std::max(worst, std::abs(q(y) - p(den.apply(y)) * det));
  }
  return worst;
}

double bump_eval(const BumpFunction& m, const Vector& x) {
  const double u = (x - m.center).squaredNorm() / (m.radius * m.radius);
  if (u >= 1.0) return 0.0;
  return m.amplitude * std::exp(1.0 - 1.0 / (1.0 - u));
}

Vector bump_grad(const BumpFunction& m, const Vector& x) {
  const Vector v = x - m.center;
  const double r2 = m.radius * m.radius;
  const double u = v.squaredNorm() / r2;
  if (u >= 1.0) return Vector::Zero(x.size());
  const double w = 1.0 - u;
  const double g1 = -bump_eval(m, x) / (w * w);
  return g1 * (2.0 / r2) * v;
}

Matrix bump_hess(const BumpFunction& m, const Vector& x) {
  const Vector v = x - m.center;
  const double r2 = m.radius * m.radius;
  const double u = v.squaredNorm() / r2;
  const auto d = x.size();
  if (u >= 1.0) return Matrix::Zero(d, d);
  const double w = 1.0 - u;
  const double g = bump_eval(m, x);
  const double g1 = -g / (w * w);
  const double g2 = g * (1.0 / (w * w * w * w) - 2.0 / (w * w * w));
  const Vector du = (2.0 / r2) * v;
  return g2 * du * du.transpose() + g1 * (2.0 / r2) * Matrix::Identity(d, d);
}

double trapezoid_1d(const std::function<double(double)>& f, const QuadratureGrid& grid) {
  if (grid.points < 2 || !(grid.hi > grid.lo)) throw ArgumentError("trapezoid_1d: bad grid");
  const double h = (grid.hi - grid.lo) / static_cast<double>(grid.points - 1);
  double acc = 0.5 * (f(grid.lo) + f(grid.hi));
  for (std::size_t i = 1; i + 1 < grid.points; ++i) acc += f(grid.lo + h * static_cast<double>(i));
  return acc * h;
}

double moment_error_quadrature_1d(const BumpFunction& m, const denoise::Denoiser& den,
                                  const DensityFn& p, const DensityFn& q,
                                  const QuadratureGrid& grid) {
  if (den.dim() != 1 || m.center.size() != 1) {
    throw ArgumentError("moment_error_quadrature_1d: one-dimensional inputs required");
  }
  if (grid.points < (std::size_t{1} << 14)) {
    throw ArgumentError("moment_error_quadrature_1d: at least 2^14 nodes required");
  }
  const double c = m.center[0];
  if (c - m.radius <= grid.lo || c + m.radius >= grid.hi) {
    throw DomainError("moment_error_quadrature_1d: bump support leaves the quadrature interval");
  }
  Vector y(1);
  auto pushed = [&](double t) {
    y[0] = t;
    return bump_eval(m, den.apply(y)) * q(y);
  };
  auto plain = [&](double t) {
    y[0] = t;
    return bump_eval(m, y) * p(y);
  };
  for (double end : {grid.lo, grid.hi}) {
    y[0] = end;
    if (bump_eval(m, den.apply(y)) != 0.0) {
      throw DomainError("moment_error_quadrature_1d: m(T(y)) is nonzero at the interval end " +
                        std::to_string(end));
    }
  }
  return trapezoid_1d(pushed, grid) - trapezoid_1d(plain, grid);
}

SlopeFit fit_slope(std::span<const double> etas, std::span<const double> errors) {
  if (etas.size() != errors.size()) throw ArgumentError("fit_slope: size mismatch");
  if (etas.size() < 4) throw ArgumentError("fit_slope: at least four points required");
  const auto n = static_cast<double>(etas.size());
  std::vector<double> lx(etas.size());
  std::vector<double> ly(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (!(etas[i] > 0.0) || !(errors[i] > 0.0)) {
      throw ArgumentError("fit_slope: etas and errors must be positive");
    }
    lx[i] = std::log(etas[i]);
    ly[i] = std::log(errors[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ArgumentError("fit_slope: etas must not all coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), res.ptr};
}

std::string MetricsReport::csv_header() {
  return "wasserstein,energy,second_moment_rel_err,ma_residual,moment_quad_err";
}

std::string MetricsReport::csv_row() const {
  std::string row = format_double(wasserstein) + "," + format_double(energy) + "," +
                    format_double(second_moment_rel_err) + ",";
  if (ma_residual) row += format_double(*ma_residual);
  row += ",";
  if (moment_quad_err) row += format_double(*moment_quad_err);
  return row;
}

}  // namespace denoise_lab::metrics
