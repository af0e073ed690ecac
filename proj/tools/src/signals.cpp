#include "denoise_lab/tools/signals.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace denoise_lab::tools {

models::GaussianMixture correlated_gaussian() {
  Matrix cov(2, 2);
  cov << 1.5, -1.0, -1.0, 0.8;
  return models::GaussianMixture::gaussian(Vector{{1.0, -0.5}}, cov);
}

models::GaussianMixture two_gaussians() {
  Matrix c1(2, 2);
  c1 << 1.5, -1.0, -1.0, 0.8;
  Matrix c2(2, 2);
  c2 << 0.8, 0.3, 0.3, 0.5;
  return models::GaussianMixture({{0.5, Vector{{1.0, -0.5}}, c1}, {0.5, Vector{{-1.0, -1.0}}, c2}});
}

namespace {

Signal from_mixture(std::string name, models::GaussianMixture m) {
  Signal s;
  s.name = std::move(name);
  s.dim = m.dim();
  s.sample = [m](std::size_t n, Rng& rng) { return models::mixture_sample(m, n, rng); };
  s.mixture = std::move(m);
  return s;
}

}  // namespace

Signal make_signal(const SignalSpec& spec) {
  if (spec.kind == "normal") return from_mixture("normal", models::GaussianMixture::standard_normal(spec.dim));
  if (spec.kind == "mixture") {
    for (const auto& c : spec.components) {
      if (c.mean.size() != static_cast<Eigen::Index>(spec.dim)) {
        throw ConfigError("config field 'signal.components': component dimension " +
                          std::to_string(c.mean.size()) + " does not match signal.dim " +
                          std::to_string(spec.dim));
      }
    }
    try {
      return from_mixture("mixture", models::GaussianMixture(spec.components));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config field 'signal.components': ") + e.what());
    }
  }
  if (spec.kind == "gauss") return from_mixture("gauss", correlated_gaussian());
  if (spec.kind == "mixture2") return from_mixture("mixture2", two_gaussians());
  Signal s;
  s.name = spec.kind;
  s.dim = 2;
  if (spec.kind == "square") {
    s.sample = [](std::size_t n, Rng& rng) {
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      SampleMatrix x(static_cast<Eigen::Index>(n), 2);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x(i, 0) = u(rng);
        x(i, 1) = u(rng);
      }
      return x;
    };
  } else if (spec.kind == "torus") {
    s.sample = [](std::size_t n, Rng& rng) {
      std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
      std::normal_distribution<double> z(0.0, std::sqrt(0.5));
      SampleMatrix x(static_cast<Eigen::Index>(n), 2);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double t = angle(rng);
        x(i, 0) = 3.0 * std::cos(t) + z(rng);
        x(i, 1) = 3.0 * std::sin(t) + z(rng);
      }
      return x;
    };
  } else {
    throw ConfigError("config field 'signal.kind': unknown '" + spec.kind + "'");
  }
  return s;
}

SampleMatrix add_noise(const SampleMatrix& x, const models::NoiseModel& noise, double eta, Rng& rng) {
  return x + std::sqrt(2.0 * eta) * models::noise_sample(noise, static_cast<std::size_t>(x.rows()), rng);
}

}  // namespace denoise_lab::tools
