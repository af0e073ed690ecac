#include "denoise_lab/errors.hpp"
#include "denoise_lab/grid.hpp"
#include "denoise_lab/models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace denoise_lab;
using namespace denoise_lab::models;

namespace {

GaussianMixture symmetric_pair() {
  return GaussianMixture({{0.5, Vector::Constant(1, -1.0), Matrix::Identity(1, 1)},
                          {0.5, Vector::Constant(1, 1.0), Matrix::Identity(1, 1)}});
}

Vector v1(double x) { return Vector::Constant(1, x); }

double normal_pdf(double x, double var) {
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

Grid1D normal_grid(double var) {
  return Grid1D::sample(-10.0, 10.0, 4096, [var](double x) { return normal_pdf(x, var); });
}

}  // namespace

TEST(MixtureDensity, StandardNormalAtZero) {
  EXPECT_NEAR(mixture_density(GaussianMixture::standard_normal(1), v1(0.0)), 0.3989422804, 1e-10);
}

TEST(MixtureDensity, SymmetricPairAtZero) {
  // φ(1), computed directly
  const double oracle = std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
  EXPECT_NEAR(oracle, 0.2419707245, 1e-10);
  EXPECT_NEAR(mixture_density(symmetric_pair(), v1(0.0)), oracle, 1e-12);
}

TEST(MixtureDensity, CorrelatedGaussianAtMean) {
  Matrix s(2, 2);
  s << 1.5, -1.0, -1.0, 0.8;
  const Vector mu = (Vector(2) << 1.0, -0.5).finished();
  const auto g = GaussianMixture::gaussian(mu, s);
  EXPECT_NEAR(s.determinant(), 0.2, 1e-14);
  const double expected = 1.0 / (2.0 * std::numbers::pi * std::sqrt(0.2));
  EXPECT_NEAR(mixture_density(g, mu), expected, 1e-12);
  EXPECT_NEAR(expected, 0.3558, 1e-4);
}

TEST(MixtureDensity, DimensionMismatchThrows) {
  EXPECT_THROW(mixture_density(GaussianMixture::standard_normal(2), v1(0.0)), ArgumentError);
}

TEST(MixtureDensity, FarTailStaysPositive) {
  EXPECT_GT(GaussianMixture::standard_normal(1).density(v1(37.0)), 0.0);
  EXPECT_NEAR(GaussianMixture::standard_normal(1).log_density(v1(60.0)),
              -1800.0 - 0.5 * std::log(2.0 * std::numbers::pi), 1e-9);
}

TEST(GaussianMixtureModel, RejectsBadComponents) {
  EXPECT_THROW(GaussianMixture({}), ModelError);
  EXPECT_THROW(GaussianMixture({{0.7, v1(0.0), Matrix::Identity(1, 1)}}), ModelError);
  EXPECT_THROW(GaussianMixture({{1.0, v1(0.0), -Matrix::Identity(1, 1)}}), ModelError);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.4, 1.0;
  EXPECT_THROW(GaussianMixture::gaussian(Vector::Zero(2), asym), ModelError);
  Matrix singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  EXPECT_THROW(GaussianMixture::gaussian(Vector::Zero(2), singular), ModelError);
}

TEST(GaussianMixtureModel, SecondMomentClosedForm) {
  const auto m = symmetric_pair();
  EXPECT_NEAR(m.second_moment()(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(m.mean()(0), 0.0, 1e-14);
}

TEST(MixtureSample, RejectsZeroCount) {
  Rng rng(1);
  EXPECT_THROW(mixture_sample(GaussianMixture::standard_normal(1), 0, rng), ArgumentError);
}

TEST(MixtureSample, StandardNormalMoments) {
  Rng rng(2024);
  const SampleMatrix x = mixture_sample(GaussianMixture::standard_normal(1), 100000, rng);
  const double mean = x.col(0).mean();
  const double var = (x.col(0).array() - mean).square().mean();
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(MixtureSample, SameSeedBitIdentical) {
  Rng a(99);
  Rng b(99);
  const auto m = symmetric_pair();
  const SampleMatrix xa = mixture_sample(m, 1000, a);
  const SampleMatrix xb = mixture_sample(m, 1000, b);
  EXPECT_TRUE((xa.array() == xb.array()).all());
}

TEST(NoisyMixture, ZeroEtaIsIdentical) {
  const auto m = symmetric_pair();
  const auto q = noisy_mixture(m, 0.0);
  for (std::size_t k = 0; k < m.size(); ++k) {
    EXPECT_EQ(q.component(k).covariance, m.component(k).covariance);
    EXPECT_EQ(q.component(k).mean, m.component(k).mean);
  }
}

TEST(NoisyMixture, StandardNormalHalf) {
  const auto q = noisy_mixture(GaussianMixture::standard_normal(1), 0.5);
  EXPECT_DOUBLE_EQ(q.component(0).covariance(0, 0), 2.0);
}

TEST(NoisyMixture, CorrelatedCovarianceShift) {
  Matrix s(2, 2);
  s << 1.5, -1.0, -1.0, 0.8;
  Matrix expected(2, 2);
  expected << 2.5, -1.0, -1.0, 1.8;
  const auto q = noisy_mixture(GaussianMixture::gaussian(Vector::Zero(2), s), 0.5);
  EXPECT_TRUE(q.component(0).covariance.isApprox(expected, 1e-15));
}

TEST(NoiseSampling, UniformSupport) {
  Rng rng(5);
  const SampleMatrix z = noise_sample(NoiseModel::uniform(3), 20000, rng);
  EXPECT_LE(z.cwiseAbs().maxCoeff(), std::sqrt(3.0));
}

TEST(NoiseSampling, GaussianCovarianceIsIdentity) {
  Rng rng(6);
  const SampleMatrix z = noise_sample(NoiseModel::gaussian(2), 100000, rng);
  const Matrix c = z.transpose() * z / static_cast<double>(z.rows());
  EXPECT_LT((c - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(NoiseSampling, UniformFourthMoment) {
  Rng rng(7);
  const SampleMatrix z = noise_sample(NoiseModel::uniform(1), 100000, rng);
  EXPECT_NEAR(z.array().pow(4).mean(), 1.8, 0.05);
}

TEST(NoiseSampling, MillionSampleCovariance) {
  for (const auto& noise : {NoiseModel::gaussian(2), NoiseModel::uniform(2)}) {
    Rng rng(8);
    const SampleMatrix z = noise_sample(noise, 1000000, rng);
    const Matrix c = z.transpose() * z / static_cast<double>(z.rows());
    EXPECT_LT((c - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.01);
  }
}

TEST(Assumption2, Reports) {
  const auto g = assumption2_report(NoiseModel::gaussian(1));
  EXPECT_TRUE(g.satisfies_i);
  EXPECT_TRUE(g.satisfies_ii);
  EXPECT_DOUBLE_EQ(g.fourth_moment, 3.0);
  const auto u = assumption2_report(NoiseModel::uniform(1));
  EXPECT_TRUE(u.satisfies_i);
  EXPECT_FALSE(u.satisfies_ii);
  EXPECT_DOUBLE_EQ(u.fourth_moment, 1.8);
}

TEST(Grid, RejectsBadInvariants) {
  EXPECT_THROW(Grid1D(-1.0, 1.0, std::vector<double>(10, 0.5)), ModelError);
  EXPECT_THROW(Grid1D(1.0, -1.0, std::vector<double>(100, 0.5)), ModelError);
  EXPECT_THROW(Grid1D(-1.0, 1.0, std::vector<double>(100, 3.0)), ModelError);
  std::vector<double> neg(100, 0.5);
  neg[3] = -1e-3;
  EXPECT_THROW(Grid1D(-1.0, 1.0, neg), ModelError);
}

TEST(Convolution, ZeroEtaIsIdentity) {
  const Grid1D p = normal_grid(1.0);
  const Grid1D q = convolve_density_1d(p, NoiseModel::gaussian(1), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(q[i], p[i], 1e-12);
}

TEST(Convolution, GaussianMatchesClosedForm) {
  const Grid1D q = convolve_density_1d(normal_grid(1.0), NoiseModel::gaussian(1), 0.5);
  double worst = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    worst = std::max(worst, std::abs(q[i] - normal_pdf(q.x(i), 2.0)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Convolution, UniformVariancesAdd) {
  const Grid1D q = convolve_density_1d(normal_grid(1.0), NoiseModel::uniform(1), 0.5);
  EXPECT_NEAR(q.second_moment(), 2.0, 1e-4);
}

TEST(Convolution, MatchesNoisyMixture) {
  const auto p = symmetric_pair();
  const Grid1D pg = Grid1D::sample(-10.0, 10.0, 4096, [&](double x) { return p.density(v1(x)); });
  const double eta = 0.3;
  const Grid1D q = convolve_density_1d(pg, NoiseModel::gaussian(1), eta);
  const auto qm = noisy_mixture(p, eta);
  double worst = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    worst = std::max(worst, std::abs(q[i] - qm.density(v1(q.x(i)))));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Convolution, InsufficientCoverageThrows) {
  const Grid1D wide = Grid1D::sample(-3.0, 3.0, 512, [](double x) { return normal_pdf(x, 0.36); });
  EXPECT_THROW(convolve_density_1d(wide, NoiseModel::gaussian(1), 2.0), DomainError);
}

TEST(Spline, ReproducesCubicInterior) {
  std::vector<double> knots;
  for (int i = 0; i <= 200; ++i) {
    const double x = -1.0 + 0.01 * i;
    knots.push_back(x * x);
  }
  const UniformCubicSpline s(-1.0, 0.01, knots);
  EXPECT_NEAR(s.eval(0.123), 0.123 * 0.123, 1e-8);
  EXPECT_NEAR(s.eval(0.123, 1), 0.246, 1e-5);
  EXPECT_NEAR(s.eval(0.123, 2), 2.0, 1e-3);
}
