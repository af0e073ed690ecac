#include "denoise_lab/denoise.hpp"

#include "denoise_lab/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace denoise_lab::denoise {

std::string_view to_string(DenoiserKind kind) {
  switch (kind) {
    case DenoiserKind::Identity: return "identity";
    case DenoiserKind::JamesStein: return "james_stein";
    case DenoiserKind::Bayes: return "bayes";
    case DenoiserKind::FirstOrder: return "first_order";
    case DenoiserKind::SecondOrder: return "second_order";
  }
  return "unknown";
}

DenoiserKind denoiser_kind_from_string(std::string_view name) {
  for (auto kind : {DenoiserKind::Identity, DenoiserKind::JamesStein, DenoiserKind::Bayes,
                    DenoiserKind::FirstOrder, DenoiserKind::SecondOrder}) {
    if (to_string(kind) == name) return kind;
  }
  throw ArgumentError("unknown denoiser kind '" + std::string(name) + "'");
}

Denoiser::Denoiser(DenoiserKind kind, double eta, score::OraclePtr oracle, int dim)
    : kind_(kind), eta_(eta), oracle_(std::move(oracle)), dim_(dim) {
  if (!(eta_ >= 0.0)) throw ArgumentError("Denoiser: eta must be nonnegative");
  if (dim_ < 1) throw ArgumentError("Denoiser: dim must be positive");
  const bool needs_oracle = kind_ == DenoiserKind::Bayes || kind_ == DenoiserKind::FirstOrder ||
                            kind_ == DenoiserKind::SecondOrder;
  if (needs_oracle) {
    if (!oracle_) {
      throw ArgumentError("Denoiser: " + std::string(to_string(kind_)) + " requires a score oracle");
    }
    if (oracle_->dim() != dim_) throw ArgumentError("Denoiser: oracle dimension mismatch");
  }
  if (kind_ == DenoiserKind::JamesStein && dim_ < 3) {
    throw ArgumentError("Denoiser: James-Stein shrinkage requires d >= 3");
  }
}

Denoiser::Denoiser(DenoiserKind kind, double eta, score::OraclePtr oracle)
    : Denoiser(kind, eta, oracle, oracle ? oracle->dim() : 0) {}

void Denoiser::check_dim(const Vector& y) const {
  if (y.size() != dim_) {
    throw ArgumentError("Denoiser: point has dimension " + std::to_string(y.size()) +
                        ", denoiser has " + std::to_string(dim_));
  }
}

Vector g_star_grad(const score::ScoreOracle& oracle, const Vector& y) {
  return -(oracle.score_jacobian(y) * oracle.score(y) + oracle.grad_laplacian(y));
}

Vector Denoiser::apply(const Vector& y) const {
  check_dim(y);
  switch (kind_) {
    case DenoiserKind::Identity:
      return y;
    case DenoiserKind::JamesStein: {
      const double r2 = y.squaredNorm();
      if (r2 == 0.0) throw DomainError("James-Stein denoiser is undefined at y = 0");
      return (1.0 - sigma_sq() * (dim_ - 2) / r2) * y;
    }
    case DenoiserKind::Bayes:
      return y + 2.0 * eta_ * oracle_->score(y);
    case DenoiserKind::FirstOrder:
      return y + eta_ * oracle_->score(y);
    case DenoiserKind::SecondOrder:
      if (eta_ == 0.0) return y;
      return y + eta_ * oracle_->score(y) + 0.5 * eta_ * eta_ * g_star_grad(*oracle_, y);
  }
  return y;
}

Matrix Denoiser::jacobian(const Vector& y) const {
  check_dim(y);
  const Matrix I = Matrix::Identity(dim_, dim_);
  switch (kind_) {
    case DenoiserKind::Identity:
      return I;
    case DenoiserKind::JamesStein: {
      const double r2 = y.squaredNorm();
      if (r2 == 0.0) throw DomainError("James-Stein denoiser is undefined at y = 0");
      const double c = sigma_sq() * (dim_ - 2);
      return (1.0 - c / r2) * I + (2.0 * c / (r2 * r2)) * y * y.transpose();
    }
    case DenoiserKind::Bayes:
      return I + 2.0 * eta_ * oracle_->score_jacobian(y);
    case DenoiserKind::FirstOrder:
      return I + eta_ * oracle_->score_jacobian(y);
    case DenoiserKind::SecondOrder: {
      if (eta_ == 0.0) return I;
      const double h = 1e-3 * (1.0 + y.norm());
      Matrix hess_g(dim_, dim_);
      Vector yp = y;
      Vector ym = y;
      for (int j = 0; j < dim_; ++j) {
        yp[j] += h;
        ym[j] -= h;
        hess_g.col(j) = (g_star_grad(*oracle_, yp) - g_star_grad(*oracle_, ym)) / (2.0 * h);
        yp[j] = y[j];
        ym[j] = y[j];
      }
      hess_g = 0.5 * (hess_g + hess_g.transpose()).eval();
      return I + eta_ * oracle_->score_jacobian(y) + 0.5 * eta_ * eta_ * hess_g;
    }
  }
  return I;
}

namespace {

template <typename Error>
[[noreturn]] void rethrow_with_row(const Error& e, Eigen::Index row) {
  throw Error("push_forward: row " + std::to_string(row) + ": " + e.what());
}

}  // namespace

SampleMatrix push_forward(const Denoiser& den, const SampleMatrix& samples) {
  if (samples.cols() != den.dim()) {
    throw ArgumentError("push_forward: samples have " + std::to_string(samples.cols()) +
                        " columns, denoiser has dim " + std::to_string(den.dim()));
  }
  if (den.kind() == DenoiserKind::Identity) return samples;
  SampleMatrix out(samples.rows(), samples.cols());
  Vector y(samples.cols());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    y = samples.row(i).transpose();
    try {
      out.row(i) = den.apply(y).transpose();
    } catch (const DomainError& e) {
      rethrow_with_row(e, i);
    } catch (const ArgumentError& e) {
      rethrow_with_row(e, i);
    }
  }
  return out;
}

SmallNoiseReport check_small_noise(const Denoiser& den, const SampleMatrix& grid) {
  if (den.kind() != DenoiserKind::FirstOrder && den.kind() != DenoiserKind::SecondOrder) {
    throw ArgumentError("check_small_noise: only first- and second-order denoisers apply");
  }
  if (grid.rows() == 0) throw ArgumentError("check_small_noise: empty grid");
  SmallNoiseReport report;
  report.min_eig = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    const Matrix J = den.jacobian(grid.row(i).transpose());
    const double lo =
        Eigen::SelfAdjointEigenSolver<Matrix>(J, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    report.min_eig = std::min(report.min_eig, lo);
  }
  report.ok = report.min_eig > 0.0;
  return report;
}

IntegrabilityMoments integrability_moments(const score::ScoreOracle& oracle,
                                           const SampleMatrix& samples) {
  if (samples.rows() == 0) throw ArgumentError("integrability_moments: empty sample");
  IntegrabilityMoments m;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const Vector y = samples.row(i).transpose();
    m.score_sq += oracle.score(y).squaredNorm();
    m.g_grad_cubed += std::pow(g_star_grad(oracle, y).norm(), 3);
  }
  const auto n = static_cast<double>(samples.rows());
  m.score_sq /= n;
  m.g_grad_cubed /= n;
  return m;
}

}  // namespace denoise_lab::denoise
