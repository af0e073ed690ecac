#pragma once

#include "denoise_lab/models.hpp"
#include "denoise_lab/tools/config.hpp"
#include "denoise_lab/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace denoise_lab::tools {

struct Signal {
  std::string name;
  int dim = 1;
  // Present when P_X is a finite Gaussian mixture, so q and its score are analytic.
  std::optional<models::GaussianMixture> mixture;
  std::function<SampleMatrix(std::size_t, Rng&)> sample;
};

Signal make_signal(const SignalSpec& spec);

// Y = X + sqrt(2η) Z with Z drawn from `noise`.
SampleMatrix add_noise(const SampleMatrix& x, const models::NoiseModel& noise, double eta, Rng& rng);

// Fixed 2D laws used by the score-matching experiments.
models::GaussianMixture correlated_gaussian();
models::GaussianMixture two_gaussians();

}  // namespace denoise_lab::tools
