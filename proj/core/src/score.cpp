#include "denoise_lab/score.hpp"

#include "denoise_lab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace denoise_lab::score {

namespace {

struct Responsibilities {
  Vector weights;              // r_k(y), sums to one
  std::vector<Vector> scores;  // Σ_k⁻¹ (μ_k − y)
};

Responsibilities responsibilities(const models::GaussianMixture& q, const Vector& y) {
  const auto K = static_cast<Eigen::Index>(q.size());
  Responsibilities r;
  r.weights.resize(K);
  q.component_log_terms(y, r.weights);
  r.weights = (r.weights.array() - r.weights.maxCoeff()).exp();
  r.weights /= r.weights.sum();
  r.scores.reserve(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    r.scores.push_back(q.precision(k) * (q.component(k).mean - y));
  }
  return r;
}

Vector weighted_mean(const Responsibilities& r) {
  Vector mean = Vector::Zero(r.scores.front().size());
  for (std::size_t k = 0; k < r.scores.size(); ++k) {
    mean += r.weights[static_cast<Eigen::Index>(k)] * r.scores[k];
  }
  return mean;
}

// Weights w such that f^(order)(x) ≈ Σ_{k=-H..H} w_k f(x + k h) / h^order.
std::vector<double> central_stencil(int order, int half_width) {
  const int n = 2 * half_width + 1;
  Matrix vander(n, n);
  Vector rhs = Vector::Zero(n);
  for (int m = 0; m < n; ++m) {
    for (int j = 0; j < n; ++j) vander(m, j) = std::pow(static_cast<double>(j - half_width), m);
  }
  rhs[order] = std::tgamma(order + 1.0);
  const Vector w = vander.fullPivLu().solve(rhs);
  return {w.data(), w.data() + n};
}

std::vector<double> differentiate_knots(const std::vector<double>& f, double h, int order,
                                        int half_width) {
  const auto w = central_stencil(order, half_width);
  const std::size_t n = f.size();
  const auto H = static_cast<std::size_t>(half_width);
  std::vector<double> out(n, 0.0);
  const double scale = std::pow(h, -order);
  for (std::size_t i = H; i + H < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * f[i + j - H];
    out[i] = acc * scale;
  }
  // Knots without a full stencil sit far outside the trusted interval; extend flat.
  for (std::size_t i = 0; i < H; ++i) out[i] = out[H];
  for (std::size_t i = n - H; i < n; ++i) out[i] = out[n - H - 1];
  return out;
}

class FdOracle final : public ScoreOracle {
 public:
  FdOracle(VectorField fn, int dim, double h) : fn_(std::move(fn)), dim_(dim), h_(h) {}

  int dim() const override { return dim_; }

  Vector score(const Vector& y) const override {
    check(y);
    return fn_(y);
  }

  Matrix score_jacobian(const Vector& y) const override {
    check(y);
    const Matrix J = raw_jacobian(y);
    return 0.5 * (J + J.transpose());
  }

  Vector grad_laplacian(const Vector& y) const override {
    check(y);
    Vector out(dim_);
    Vector yp = y;
    Vector ym = y;
    for (int i = 0; i < dim_; ++i) {
      yp[i] += h_;
      ym[i] -= h_;
      out[i] = (raw_jacobian(yp).trace() - raw_jacobian(ym).trace()) / (2.0 * h_);
      yp[i] = y[i];
      ym[i] = y[i];
    }
    return out;
  }

 private:
  void check(const Vector& y) const {
    if (y.size() != dim_) throw ArgumentError("fd_oracle: dimension mismatch");
  }

  Matrix raw_jacobian(const Vector& y) const {
    Matrix J(dim_, dim_);
    Vector yp = y;
    Vector ym = y;
    for (int j = 0; j < dim_; ++j) {
      yp[j] += h_;
      ym[j] -= h_;
      J.col(j) = (fn_(yp) - fn_(ym)) / (2.0 * h_);
      yp[j] = y[j];
      ym[j] = y[j];
    }
    return J;
  }

  VectorField fn_;
  int dim_;
  double h_;
};

}  // namespace

Vector mixture_score(const models::GaussianMixture& q, const Vector& y) {
  return weighted_mean(responsibilities(q, y));
}

Matrix mixture_score_jacobian(const models::GaussianMixture& q, const Vector& y) {
  const auto r = responsibilities(q, y);
  const Vector mean = weighted_mean(r);
  Matrix J = -mean * mean.transpose();
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double rk = r.weights[static_cast<Eigen::Index>(k)];
    J += rk * (r.scores[k] * r.scores[k].transpose() - q.precision(k));
  }
  J = 0.5 * (J + J.transpose()).eval();
  return J;
}

double mixture_log_laplacian(const models::GaussianMixture& q, const Vector& y) {
  const auto r = responsibilities(q, y);
  double lap = -weighted_mean(r).squaredNorm();
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double rk = r.weights[static_cast<Eigen::Index>(k)];
    lap += rk * (r.scores[k].squaredNorm() - q.precision(k).trace());
  }
  return lap;
}

Vector mixture_grad_laplacian(const models::GaussianMixture& q, const Vector& y) {
  const int d = q.dim();
  if (y.size() != d) throw ArgumentError("mixture_grad_laplacian: dimension mismatch");
  const double h = 1e-3 * (1.0 + y.norm());
  Vector out(d);
  Vector shifted = y;
  auto central = [&](int i, double step) {
    shifted[i] = y[i] + step;
    const double up = mixture_log_laplacian(q, shifted);
    shifted[i] = y[i] - step;
    const double down = mixture_log_laplacian(q, shifted);
    shifted[i] = y[i];
    return (up - down) / (2.0 * step);
  };
  for (int i = 0; i < d; ++i) {
    const double coarse = central(i, h);
    const double fine = central(i, 0.5 * h);
    out[i] = (4.0 * fine - coarse) / 3.0;
  }
  return out;
}

std::shared_ptr<const MixtureOracle> mixture_oracle(models::GaussianMixture q) {
  return std::make_shared<const MixtureOracle>(std::move(q));
}

OraclePtr fd_oracle(VectorField score_fn, int dim, double h) {
  if (!(h > 0.0)) throw ArgumentError("fd_oracle: step must be positive");
  if (dim < 1) throw ArgumentError("fd_oracle: dim must be positive");
  return std::make_shared<const FdOracle>(std::move(score_fn), dim, h);
}

namespace {

std::vector<double> log_knots(const models::Grid1D& q, double trusted_lo, double trusted_hi) {
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double v = q[i];
    const double x = q.x(i);
    // Stencils reach a few knots past the trusted interval, so check with a margin.
    const double margin = 8.0 * q.spacing();
    if (x >= trusted_lo - margin && x <= trusted_hi + margin && !(v > 0.0)) {
      throw DomainError("grid_oracle_1d: nonpositive density at x = " + std::to_string(x));
    }
    out[i] = std::log(std::max(v, 1e-300));
  }
  return out;
}

}  // namespace

GridOracle1D::GridOracle1D(const models::Grid1D& q)
    : GridOracle1D(q, q.lo() + 0.05 * (q.hi() - q.lo()), q.hi() - 0.05 * (q.hi() - q.lo())) {}

GridOracle1D::GridOracle1D(const models::Grid1D& q, double trusted_lo, double trusted_hi)
    : GridOracle1D(q.lo(), q.spacing(), trusted_lo, trusted_hi,
                   log_knots(q, trusted_lo, trusted_hi)) {}

GridOracle1D::GridOracle1D(double lo, double h, double trusted_lo, double trusted_hi,
                           const std::vector<double>& log_q)
    : trusted_lo_(trusted_lo),
      trusted_hi_(trusted_hi),
      log_q_(lo, h, log_q),
      d1_(lo, h, differentiate_knots(log_q, h, 1, 4)),
      d2_(lo, h, differentiate_knots(log_q, h, 2, 4)),
      d3_(lo, h, differentiate_knots(log_q, h, 3, 5)) {}

double GridOracle1D::checked(const Vector& y) const {
  if (y.size() != 1) throw ArgumentError("GridOracle1D: expected a 1D point");
  const double v = y[0];
  if (!(v >= trusted_lo_ && v <= trusted_hi_)) {
    throw DomainError("GridOracle1D: query " + std::to_string(v) + " outside trusted interval [" +
                      std::to_string(trusted_lo_) + ", " + std::to_string(trusted_hi_) + "]");
  }
  return v;
}

Vector GridOracle1D::score(const Vector& y) const {
  return Vector::Constant(1, d1_.eval(checked(y)));
}

Matrix GridOracle1D::score_jacobian(const Vector& y) const {
  return Matrix::Constant(1, 1, d2_.eval(checked(y)));
}

Vector GridOracle1D::grad_laplacian(const Vector& y) const {
  return Vector::Constant(1, d3_.eval(checked(y)));
}

double GridOracle1D::density(double y) const {
  return std::exp(log_q_.eval(checked(Vector::Constant(1, y))));
}

std::shared_ptr<const GridOracle1D> grid_oracle_1d(const models::Grid1D& q) {
  return std::make_shared<const GridOracle1D>(q);
}

}  // namespace denoise_lab::score
