#include "denoise_lab/errors.hpp"
#include "denoise_lab/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace denoise_lab;
using namespace denoise_lab::metrics;
using denoise::Denoiser;
using denoise::DenoiserKind;
using models::GaussianMixture;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

GaussianMixture gaussian_1d(double mean, double var) {
  return GaussianMixture::gaussian(v1(mean), Matrix::Constant(1, 1, var));
}

SampleMatrix column(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

DensityFn density_of(const GaussianMixture& m) {
  return [m](const Vector& x) { return m.density(x); };
}

BumpFunction bump_1d() { return {v1(0.5), 2.0, 1.0}; }

}  // namespace

TEST(Wasserstein1d, SpecValues) {
  const std::vector<double> a = {0.3, -1.0, 2.0};
  EXPECT_EQ(wasserstein_1d(a, a, 2), 0.0);
  EXPECT_NEAR(wasserstein_1d(std::vector<double>{0.0}, std::vector<double>{1.0}, 1), 1.0, 1e-15);
  EXPECT_NEAR(wasserstein_1d(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 3.0}, 2),
              2.2360679, 1e-7);
  EXPECT_THROW(wasserstein_1d(std::vector<double>{}, a, 2), ArgumentError);
}

TEST(Wasserstein1d, MetricOnRandomTriples) {
  Rng rng(41);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(30), b(30), c(30);
    for (auto* v : {&a, &b, &c})
      for (auto& x : *v) x = n(rng) * (1 + t % 3);
    const double ab = wasserstein_1d(a, b, 2);
    EXPECT_EQ(ab, wasserstein_1d(b, a, 2));
    EXPECT_LE(ab, wasserstein_1d(a, c, 2) + wasserstein_1d(c, b, 2) + 1e-12);
  }
}

TEST(Sinkhorn, SelfDistanceIsZero) {
  Rng rng(42);
  const SampleMatrix a = models::mixture_sample(GaussianMixture::standard_normal(2), 300, rng);
  const auto r = sinkhorn_w2(a, a);
  EXPECT_LT(r.value, 1e-6);
  EXPECT_TRUE(r.converged);
}

TEST(Sinkhorn, TranslationRecoversOffset) {
  Rng rng(43);
  const SampleMatrix a = models::mixture_sample(GaussianMixture::standard_normal(2), 500, rng);
  const Eigen::RowVector2d t(0.8, -0.6);
  const SampleMatrix b = a.rowwise() + t;
  const auto r = sinkhorn_w2(a, b);
  EXPECT_NEAR(r.value, 1.0, 0.02);
}

TEST(Sinkhorn, IsotropicGaussianBures) {
  Rng rng(44);
  const SampleMatrix a = models::mixture_sample(GaussianMixture::standard_normal(2), 1000, rng);
  const SampleMatrix b = models::mixture_sample(
      GaussianMixture::gaussian(Vector::Zero(2), 4.0 * Matrix::Identity(2, 2)), 1000, rng);
  const auto r = sinkhorn_w2(a, b);
  EXPECT_NEAR(r.value, std::sqrt(2.0), 0.1 * std::sqrt(2.0));
  EXPECT_TRUE(r.converged);
}

TEST(Sinkhorn, RejectsBadInput) {
  EXPECT_THROW(sinkhorn_w2(SampleMatrix(0, 2), SampleMatrix::Ones(3, 2)), ArgumentError);
  EXPECT_THROW(sinkhorn_w2(SampleMatrix::Ones(3, 1), SampleMatrix::Ones(3, 2)), ArgumentError);
}

TEST(Energy, SpecValues) {
  EXPECT_NEAR(energy_distance(column({0.0}), column({1.0})), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(energy_distance(column({0.0, 1.0}), column({0.0, 1.0})), 0.0);
  EXPECT_EQ(energy_distance(column({2.0, -1.0, 0.5}), column({0.5, 2.0, -1.0})), 0.0);
  EXPECT_GT(energy_distance(column({0.0, 1.0}), column({0.0, 1.1})), 0.0);
}

TEST(Energy, SortedPathMatchesPairwise) {
  Rng rng(45);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(50), b(70);
  for (auto& x : a) x = n(rng);
  for (auto& x : b) x = 0.5 + n(rng);
  auto mean_abs = [](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (double x : u)
      for (double y : v) s += std::abs(x - y);
    return s / static_cast<double>(u.size() * v.size());
  };
  const double d2 = 2.0 * mean_abs(a, b) - mean_abs(a, a) - mean_abs(b, b);
  EXPECT_NEAR(energy_distance(column(a), column(b)), std::sqrt(d2), 1e-12);
  // 2D path agrees when the second coordinate is constant
  SampleMatrix a2(50, 2), b2(70, 2);
  a2 << column(a), SampleMatrix::Zero(50, 1);
  b2 << column(b), SampleMatrix::Zero(70, 1);
  EXPECT_NEAR(energy_distance(a2, b2), std::sqrt(d2), 1e-12);
}

TEST(SecondMomentError, SelfConsistency) {
  Rng rng(46);
  const auto ref = GaussianMixture::standard_normal(2);
  EXPECT_LT(second_moment_error(models::mixture_sample(ref, 1000000, rng), ref), 0.005);
}

TEST(SecondMomentError, BayesAndFirstOrderPushForwards) {
  Rng rng(47);
  const double eta = 0.5;
  const auto p = GaussianMixture::standard_normal(1);
  const auto q = models::noisy_mixture(p, eta);
  const auto o = score::mixture_oracle(q);
  const SampleMatrix y = models::mixture_sample(q, 400000, rng);
  EXPECT_NEAR(second_moment_error(push_forward(Denoiser(DenoiserKind::Bayes, eta, o), y), p), 0.5,
              0.01);
  EXPECT_NEAR(
      second_moment_error(push_forward(Denoiser(DenoiserKind::FirstOrder, eta, o), y), p), 0.125,
      0.01);
}

TEST(MaResidual, IdentityCases) {
  const SampleMatrix grid = Eigen::VectorXd::LinSpaced(1201, -6.0, 6.0);
  const auto p = gaussian_1d(0.0, 1.0);
  const auto q = gaussian_1d(0.0, 2.0);
  EXPECT_EQ(ma_residual(Denoiser::identity(1), density_of(p), density_of(p), grid), 0.0);
  const double expected = 1.0 / std::sqrt(2.0 * std::numbers::pi) * (1.0 - 1.0 / std::sqrt(2.0));
  EXPECT_NEAR(expected, 0.1168, 1e-4);
  EXPECT_NEAR(ma_residual(Denoiser::identity(1), density_of(p), density_of(q), grid), expected,
              1e-4);
}

TEST(MaResidual, ExactTransportMapVanishes) {
  const auto p = gaussian_1d(0.7, 0.5);
  const auto q = gaussian_1d(-0.2, 1.8);
  // Affine map as a first-order denoiser around an oracle whose score is (T(y) − y)/η.
  const double a = std::sqrt(0.5 / 1.8);
  const double eta = 1.0;
  const auto map = score::fd_oracle(
      [a](const Vector& y) -> Vector { return v1(0.7 + a * (y(0) + 0.2) - y(0)); }, 1, 1e-4);
  const Denoiser t(DenoiserKind::FirstOrder, eta, map);
  const SampleMatrix grid = Eigen::VectorXd::LinSpaced(257, -5.0, 5.0);
  EXPECT_LT(ma_residual(t, density_of(p), density_of(q), grid), 1e-10);
}

// For N(0, v) the residual scales like η²(1 - 3η/v + ...), so v = 4 keeps the
// pair η = 0.05, 0.1 close to the asymptotic ratio of 4.
TEST(MaResidual, FirstOrderRatio) {
  const auto p = gaussian_1d(0.0, 4.0);
  auto residual = [&](double eta) {
    const auto q = models::noisy_mixture(p, eta);
    const Denoiser t(DenoiserKind::FirstOrder, eta, score::mixture_oracle(q));
    const SampleMatrix grid = Eigen::VectorXd::LinSpaced(513, -8.0, 8.0);
    return ma_residual(t, density_of(p), density_of(q), grid);
  };
  const double ratio = residual(0.1) / residual(0.05);
  EXPECT_GE(ratio, 3.6);
  EXPECT_LE(ratio, 4.4);
}

TEST(MaResidual, NonpositiveDeterminantNamesPoint) {
  const auto q = gaussian_1d(0.0, 2.0);
  const Denoiser t(DenoiserKind::Bayes, 3.0, score::mixture_oracle(q));
  const SampleMatrix grid = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  try {
    ma_residual(t, density_of(q), density_of(q), grid);
    FAIL() << "expected an assumption violation";
  } catch (const AssumptionViolation& e) {
    EXPECT_NE(std::string(e.what()).find("-1"), std::string::npos) << e.what();
  }
}

TEST(Bump, Values) {
  const auto m = bump_1d();
  EXPECT_NEAR(bump_eval(m, v1(0.5)), 1.0, 1e-15);
  EXPECT_EQ(bump_eval(m, v1(2.5)), 0.0);
  EXPECT_EQ(bump_eval(m, v1(-1.5)), 0.0);
  EXPECT_NEAR(bump_grad(m, v1(0.5))(0), 0.0, 1e-15);
  const double h = 1e-5;
  const double x = 1.1;
  EXPECT_NEAR(bump_grad(m, v1(x))(0), (bump_eval(m, v1(x + h)) - bump_eval(m, v1(x - h))) / (2 * h),
              1e-8);
  EXPECT_NEAR(bump_hess(m, v1(x))(0, 0),
              (bump_grad(m, v1(x + h))(0) - bump_grad(m, v1(x - h))(0)) / (2 * h), 1e-7);
}

TEST(MomentQuadrature, TrivialCases) {
  const auto p = GaussianMixture::standard_normal(1);
  const auto o = score::mixture_oracle(p);
  EXPECT_NEAR(moment_error_quadrature_1d(bump_1d(), Denoiser(DenoiserKind::FirstOrder, 0.0, o),
                                         density_of(p), density_of(p)),
              0.0, 1e-10);
  BumpFunction zero = bump_1d();
  zero.amplitude = 0.0;
  EXPECT_EQ(moment_error_quadrature_1d(zero, Denoiser(DenoiserKind::FirstOrder, 0.1, o),
                                       density_of(p), density_of(p)),
            0.0);
}

TEST(MomentQuadrature, FirstOrderRatio) {
  const auto p = GaussianMixture::standard_normal(1);
  auto err = [&](double eta) {
    const auto q = models::noisy_mixture(p, eta);
    const Denoiser t(DenoiserKind::FirstOrder, eta, score::mixture_oracle(q));
    return moment_error_quadrature_1d(bump_1d(), t, density_of(p), density_of(q));
  };
  const double ratio = err(0.1) / err(0.05);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(MomentQuadrature, SupportEscapeThrows) {
  const auto p = GaussianMixture::standard_normal(1);
  const BumpFunction far{v1(11.5), 2.0, 1.0};
  EXPECT_THROW(moment_error_quadrature_1d(far, Denoiser::identity(1), density_of(p), density_of(p)),
               DomainError);
}

TEST(FitSlope, SpecValues) {
  const std::vector<double> etas = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3};
  std::vector<double> quad, cubic, floored;
  for (double e : etas) {
    quad.push_back(3.0 * e * e);
    cubic.push_back(0.7 * e * e * e);
    floored.push_back(e * e + 0.001);
  }
  const auto a = fit_slope(etas, quad);
  EXPECT_NEAR(a.slope, 2.0, 1e-12);
  EXPECT_NEAR(a.r2, 1.0, 1e-12);
  EXPECT_NEAR(fit_slope(etas, cubic).slope, 3.0, 1e-12);
  const auto f = fit_slope(etas, floored);
  EXPECT_LT(f.slope, 2.0);
  EXPECT_LT(f.r2, 1.0);
  std::vector<double> bad = quad;
  bad[2] = 0.0;
  EXPECT_THROW(fit_slope(etas, bad), ArgumentError);
}

TEST(Report, CsvFormat) {
  MetricsReport r;
  r.wasserstein = 0.1;
  r.energy = 1.0 / 3.0;
  r.second_moment_rel_err = 2.5e-7;
  r.ma_residual = 0.25;
  const std::string row = r.csv_row();
  const std::string header = MetricsReport::csv_header();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(row.back(), ',');
}
