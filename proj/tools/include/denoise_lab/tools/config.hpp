#pragma once

#include "denoise_lab/metrics.hpp"
#include "denoise_lab/models.hpp"
#include "denoise_lab/scorematch.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace denoise_lab::tools {

// Invalid or missing configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { Demo1d, Demo2d, Sweep, Ma, Moments, Scorematch, Verify };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

/// Signal law P_X.
///   normal    standard normal in `dim` dimensions
///   mixture   explicit Gaussian components
///   gauss     correlated Gaussian N(μ₁, Σ₁)
///   mixture2  equal mixture of N(μ₁, Σ₁) and N(μ₂, Σ₂)
///   square    Uniform[−2, 2]²
///   torus     means uniform on the circle of radius 3, component covariance 0.5 I
struct SignalSpec {
  std::string kind = "normal";
  int dim = 1;
  std::vector<models::GaussianComponent> components;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Sweep;
  SignalSpec signal;
  std::string noise = "gaussian";
  double eta = 0.5;
  std::vector<double> etas = {0.02, 0.04, 0.08, 0.16};
  std::size_t n_train = 6400;
  std::size_t n_test = 1000;
  std::size_t n_mc = 1000000;
  // Sweep second moments: "auto" uses the closed form for a single Gaussian signal.
  std::string second_moment = "auto";
  std::size_t ma_points = 257;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  scorematch::TrainConfig train;
  metrics::BumpFunction bump;

  void validate() const;
};

// The experiment is taken from the subcommand when given; a conflicting
// `experiment:` entry in the file is an error.
ExperimentConfig load_config(const std::string& path,
                             std::optional<Experiment> subcommand = std::nullopt);
ExperimentConfig parse_config(const std::string& yaml_text,
                              std::optional<Experiment> subcommand = std::nullopt);

// Command-line values win over the file. A single --eta sets both eta and etas.
struct Overrides {
  std::optional<std::vector<double>> eta;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

// Stable text form of the effective configuration; hashed into the manifest.
std::string canonical(const ExperimentConfig& cfg);
std::uint64_t fnv1a(const std::string& text);

models::NoiseModel noise_model(const ExperimentConfig& cfg, int dim);

}  // namespace denoise_lab::tools
