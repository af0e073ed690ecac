#include "denoise_lab/verify.hpp"

#include "denoise_lab/denoise.hpp"
#include "denoise_lab/errors.hpp"
#include "denoise_lab/grid.hpp"
#include "denoise_lab/metrics.hpp"
#include "denoise_lab/score.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace denoise_lab::verify {

namespace {

struct LogJet {
  Vector grad;       // ∇f
  Matrix hess;       // ∇²f
  double lap = 0.0;  // Δf
  Vector grad_lap;   // ∇Δf
};

LogJet log_jet(const models::GaussianMixture& q, const Vector& y) {
  LogJet f;
  f.grad = score::mixture_score(q, y);
  f.hess = score::mixture_score_jacobian(q, y);
  f.lap = f.hess.trace();
  f.grad_lap = score::mixture_grad_laplacian(q, y);
  return f;
}

double relative(double diff, double scale, double q) { return diff / (scale + q); }

void finish_slope(CheckResult& r, const std::vector<double>& etas, const std::vector<double>& res,
                  double lo, double hi) {
  const auto fit = metrics::fit_slope(etas, res);
  r.slope = fit.slope;
  r.r2 = fit.r2;
  r.slope_lo = lo;
  r.slope_hi = hi;
  r.max_residual = *std::max_element(res.begin(), res.end());
  for (std::size_t i = 0; i < etas.size(); ++i) {
    r.parts.emplace_back("eta=" + metrics::format_double(etas[i]), res[i]);
  }
  r.pass = r.max_residual <= r.threshold && fit.slope >= lo && fit.slope <= hi && fit.r2 >= kMinR2;
}

void check_points_shape(const models::GaussianMixture& q, const SampleMatrix& points,
                        const char* who) {
  if (points.rows() == 0) throw ArgumentError(std::string(who) + ": no points");
  if (points.cols() != q.dim()) throw ArgumentError(std::string(who) + ": dimension mismatch");
}

}  // namespace

std::string CheckResult::csv_header() {
  return "name,max_residual,threshold,slope,slope_lo,slope_hi,r2,pass";
}

std::string CheckResult::csv_row() const {
  using metrics::format_double;
  std::string row = name + "," + format_double(max_residual) + "," + format_double(threshold) + ",";
  if (slope) {
    row += format_double(*slope) + "," + format_double(slope_lo) + "," + format_double(slope_hi);
  } else {
    row += ",,";
  }
  row += ",";
  if (r2) row += format_double(*r2);
  row += pass ? ",1" : ",0";
  return row;
}

CheckResult check_det_expansion(const Matrix& a, const std::vector<double>& etas) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ArgumentError("check_det_expansion: A must be square");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ArgumentError("check_det_expansion: A must be symmetric");
  }
  if (etas.empty()) throw ArgumentError("check_det_expansion: no etas");
  const auto d = a.rows();
  const double tr = a.trace();
  const double tr2 = (a * a).trace();
  const double rho = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().cwiseAbs().maxCoeff();
  CheckResult r;
  r.name = "det_expansion_d" + std::to_string(d);
  std::vector<double> res;
  double bound = 0.0;
  for (double eta : etas) {
    const Matrix m = Matrix::Identity(d, d) + eta * a;
    const double expansion = 1.0 + eta * tr + 0.5 * eta * eta * (tr * tr - tr2);
    res.push_back(std::abs(m.determinant() - expansion));
    // Σ_{k≥3} C(d,k) (ηρ)^k dominates the remainder.
    const double x = eta * rho;
    const auto dd = static_cast<double>(d);
    bound = std::max(bound, std::pow(1.0 + x, dd) - 1.0 - dd * x - 0.5 * dd * (dd - 1.0) * x * x);
  }
  if (d <= 2) {
    r.threshold = 1e-12;
    r.max_residual = *std::max_element(res.begin(), res.end());
    r.pass = r.max_residual <= r.threshold;
    return r;
  }
  r.threshold = bound * (1.0 + 1e-9) + 1e-14;
  if (etas.size() < 4) {
    r.max_residual = *std::max_element(res.begin(), res.end());
    for (std::size_t i = 0; i < etas.size(); ++i) {
      r.parts.emplace_back("eta=" + metrics::format_double(etas[i]), res[i]);
    }
    r.pass = r.max_residual <= r.threshold;
    return r;
  }
  finish_slope(r, etas, res, 2.9, 3.1);
  return r;
}

CheckResult check_log_density_identities(const models::GaussianMixture& q,
                                         const SampleMatrix& points) {
  check_points_shape(q, points, "check_log_density_identities");
  std::array<double, 4> worst{};
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    const Vector y = points.row(n).transpose();
    const auto j = q.jet(y);
    const auto f = log_jet(q, y);
    const double qv = j.value;
    const double g2 = f.grad.squaredNorm();

    worst[0] = std::max(worst[0], relative((qv * f.grad - j.gradient).norm(), j.gradient.norm(), qv));
    const Matrix lhs2 = qv * (f.hess + f.grad * f.grad.transpose());
    worst[1] = std::max(worst[1], relative((lhs2 - j.hessian).norm(), j.hessian.norm(), qv));
    const double lap_q = j.hessian.trace();
    worst[2] = std::max(worst[2], relative(std::abs(qv * (f.lap + g2) - lap_q), std::abs(lap_q), qv));
    const Vector lhs4 = qv * (f.lap * f.grad + g2 * f.grad + f.grad_lap + 2.0 * f.hess * f.grad);
    worst[3] = std::max(worst[3],
                        relative((lhs4 - j.grad_laplacian).norm(), j.grad_laplacian.norm(), qv));
  }
  CheckResult r;
  r.name = "log_density_identities_d" + std::to_string(q.dim());
  r.threshold = 1e-5;
  const char* labels[] = {"i", "ii", "iii", "iv"};
  for (std::size_t k = 0; k < 4; ++k) r.parts.emplace_back(labels[k], worst[k]);
  r.max_residual = *std::max_element(worst.begin(), worst.end());
  r.pass = r.max_residual <= r.threshold;
  return r;
}

CheckResult check_third_order_identity(const models::GaussianMixture& q,
                                       const SampleMatrix& points) {
  check_points_shape(q, points, "check_third_order_identity");
  const int d = q.dim();
  auto field = [&q](const Vector& y) -> Vector {
    const auto j = q.jet(y);
    const Vector grad_f = score::mixture_score(q, y);
    const Matrix hess_f = score::mixture_score_jacobian(q, y);
    return j.hessian.trace() * grad_f - hess_f * j.gradient;
  };
  double worst = 0.0;
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    const Vector y = points.row(n).transpose();
    const double h = 1e-3;
    double lhs = 0.0;
    Vector shifted = y;
    for (int i = 0; i < d; ++i) {
      auto central = [&](double step) {
        shifted[i] = y[i] + step;
        const double up = field(shifted)[i];
        shifted[i] = y[i] - step;
        const double down = field(shifted)[i];
        shifted[i] = y[i];
        return (up - down) / (2.0 * step);
      };
      lhs += (4.0 * central(0.5 * h) - central(h)) / 3.0;
    }
    const auto j = q.jet(y);
    const auto f = log_jet(q, y);
    const double rhs = f.grad.dot(j.hessian * f.grad) + 2.0 * j.gradient.dot(f.grad) * f.lap +
                       j.value * (f.lap * f.lap - f.hess.squaredNorm());
    worst = std::max(worst, relative(std::abs(lhs - rhs), std::abs(rhs), j.value));
  }
  CheckResult r;
  r.name = "third_order_identity_d" + std::to_string(d);
  r.threshold = 1e-4;
  r.max_residual = worst;
  r.pass = worst <= r.threshold;
  return r;
}

std::vector<CheckResult> check_convolution_expansion(const models::GaussianMixture& p,
                                                     const models::NoiseModel& noise,
                                                     const std::vector<double>& etas) {
  if (p.dim() != 1 || noise.dim() != 1) {
    throw ArgumentError("check_convolution_expansion: one-dimensional inputs required");
  }
  for (double eta : etas) {
    if (!(eta > 0.0 && eta <= 0.25)) {
      throw ArgumentError("check_convolution_expansion: etas must lie in (0, 0.25]");
    }
  }
  const std::size_t n = 4096;
  const double lo = -10.0;
  const double hi = 10.0;
  Vector x(1);
  const auto grid = models::Grid1D::sample(lo, hi, n, [&](double t) {
    x[0] = t;
    return p.density(x);
  });
  std::vector<double> lap(n);
  std::vector<double> bilap(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[0] = grid.x(i);
    const auto j = p.jet(x);
    lap[i] = j.hessian(0, 0);
    bilap[i] = j.bilaplacian;
  }
  std::vector<double> first;
  std::vector<double> second;
  for (double eta : etas) {
    const auto q = models::convolve_density_1d(grid, noise, eta);
    double r1 = 0.0;
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e1 = grid[i] + eta * lap[i];
      r1 = std::max(r1, std::abs(q[i] - e1));
      r2 = std::max(r2, std::abs(q[i] - e1 - 0.5 * eta * eta * bilap[i]));
    }
    first.push_back(r1);
    second.push_back(r2);
  }
  const bool gaussian = noise.kind() == models::NoiseKind::GaussianIso;
  const std::string tag = gaussian ? "gaussian" : "uniform";
  CheckResult one;
  one.name = "convolution_expansion_first_" + tag;
  one.threshold = 0.1;
  finish_slope(one, etas, first, 1.9, std::numeric_limits<double>::infinity());
  CheckResult two;
  two.name = "convolution_expansion_second_" + tag;
  two.threshold = 0.1;
  if (gaussian) {
    finish_slope(two, etas, second, 2.9, std::numeric_limits<double>::infinity());
  } else {
    finish_slope(two, etas, second, -std::numeric_limits<double>::infinity(), 2.3);
  }
  return {one, two};
}

CheckResult check_denoising_equations(const models::GaussianMixture& q,
                                      const SampleMatrix& points) {
  check_points_shape(q, points, "check_denoising_equations");
  double worst_first = 0.0;
  double worst_second = 0.0;
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    const Vector y = points.row(n).transpose();
    const auto j = q.jet(y);
    const auto f = log_jet(q, y);
    worst_first = std::max(
        worst_first, relative((j.value * f.grad - j.gradient).norm(), j.gradient.norm(), j.value));
    const Vector grad_g = -(f.hess * f.grad + f.grad_lap);
    const Vector rhs = f.hess * j.gradient + j.hessian.trace() * f.grad - j.grad_laplacian;
    worst_second =
        std::max(worst_second, relative((j.value * grad_g - rhs).norm(), rhs.norm(), j.value));
  }
  CheckResult r;
  r.name = "denoising_equations_d" + std::to_string(q.dim());
  r.threshold = 1e-4;
  r.parts = {{"first", worst_first}, {"second", worst_second}};
  r.max_residual = std::max(worst_first, worst_second);
  r.pass = r.max_residual <= r.threshold;
  return r;
}

models::GaussianMixture mixture_1d() {
  return models::GaussianMixture({
      {0.4, Vector::Constant(1, -1.0), Matrix::Constant(1, 1, 0.8)},
      {0.6, Vector::Constant(1, 1.2), Matrix::Constant(1, 1, 1.0)},
  });
}

models::GaussianMixture mixture_2d() {
  Matrix s1(2, 2);
  s1 << 1.5, -1.0, -1.0, 0.8;
  Matrix s2(2, 2);
  s2 << 0.8, 0.3, 0.3, 0.5;
  Vector m1(2);
  m1 << 1.0, -0.5;
  Vector m2(2);
  m2 << -1.0, -1.0;
  return models::GaussianMixture({{0.5, m1, s1}, {0.5, m2, s2}});
}

SampleMatrix check_points(const models::GaussianMixture& q, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return models::mixture_sample(q, n, rng);
}

std::vector<CheckResult> default_battery() {
  std::vector<CheckResult> out;

  Matrix a2(2, 2);
  a2 << 1.0, 0.0, 0.0, 2.0;
  out.push_back(check_det_expansion(a2, {0.1, 0.2, 0.4}));
  const std::vector<double> small = {0.0005, 0.001, 0.002, 0.004};
  out.push_back(check_det_expansion(Matrix::Identity(3, 3), small));
  Rng rng(7);
  std::normal_distribution<double> gauss;
  Matrix a4(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) a4(i, j) = gauss(rng);
  }
  out.push_back(check_det_expansion(0.5 * (a4 + a4.transpose()), small));

  const auto m1 = mixture_1d();
  const auto m2 = mixture_2d();
  const auto p1 = check_points(m1, 50, 11);
  const auto p2 = check_points(m2, 25, 13);
  out.push_back(check_log_density_identities(m1, p1));
  out.push_back(check_log_density_identities(m2, p2));
  out.push_back(check_third_order_identity(m1, p1));
  out.push_back(check_third_order_identity(m2, p2));

  const std::vector<double> etas = {0.005, 0.01, 0.02, 0.04, 0.08};
  for (const auto& noise : {models::NoiseModel::gaussian(1), models::NoiseModel::uniform(1)}) {
    for (auto& r : check_convolution_expansion(m1, noise, etas)) out.push_back(std::move(r));
  }

  out.push_back(check_denoising_equations(m1, p1));
  out.push_back(check_denoising_equations(m2, p2));
  return out;
}

}  // namespace denoise_lab::verify
