#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace denoise_lab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One sample per row: n x d.
using SampleMatrix = Eigen::MatrixXd;

// Every sampler takes the caller's generator so runs are reproducible from a seed.
using Rng = std::mt19937_64;

}  // namespace denoise_lab
