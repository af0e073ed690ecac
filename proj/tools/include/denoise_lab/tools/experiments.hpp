#pragma once

#include "denoise_lab/denoise.hpp"
#include "denoise_lab/metrics.hpp"
#include "denoise_lab/scorematch.hpp"
#include "denoise_lab/tools/config.hpp"
#include "denoise_lab/tools/output.hpp"

#include <optional>
#include <string>
#include <vector>

namespace denoise_lab::tools {

using denoise::DenoiserKind;

struct DenoiserInfo {
  DenoiserKind kind;
  std::string label;
  std::string color;
};

// Identity, Bayes, T1, T2 in plotting order (blue, orange, green, red).
const std::vector<DenoiserInfo>& compared_denoisers();
const DenoiserInfo& info(DenoiserKind kind);

// E[T(Y) T(Y)ᵀ] for P_X = N(μ, S₀) under Gaussian noise, where every compared
// denoiser is affine: T(y) = μ + M (y − μ) with S = S₀ + 2ηI and
//   Bayes M = I − 2ηS⁻¹,  T1 M = I − ηS⁻¹,  T2 M = I − ηS⁻¹ − (η²/2)S⁻².
Matrix gaussian_pushforward_second_moment(const models::GaussianMixture& p, DenoiserKind kind,
                                          double eta);

struct SweepRow {
  double eta = 0.0;
  DenoiserKind kind = DenoiserKind::Identity;
  double second_moment_rel_err = 0.0;
  double second_moment_se = 0.0;  // 0 on the closed-form path
  bool closed_form = false;
  double wasserstein = 0.0;
  double energy = 0.0;
};

std::vector<SweepRow> sweep_rows(const ExperimentConfig& cfg);

struct RateRow {
  double eta = 0.0;
  DenoiserKind kind = DenoiserKind::Identity;
  std::optional<double> value;  // signed for moment errors
  std::string status = "ok";
};

struct SlopeRow {
  DenoiserKind kind = DenoiserKind::Identity;
  std::optional<metrics::SlopeFit> fit;
  std::size_t points = 0;
};

// Log-log fits of |value| against η over rows with η > 0 and a nonzero value.
std::vector<SlopeRow> fit_slopes(const std::vector<RateRow>& rows);

std::vector<RateRow> ma_rows(const ExperimentConfig& cfg);
std::vector<RateRow> moment_rows(const ExperimentConfig& cfg);
// −∫ m″ p, the limit of the Bayes moment error divided by η.
double moment_leading_integral(const ExperimentConfig& cfg);

struct DistanceRow {
  DenoiserKind kind = DenoiserKind::Identity;
  double wasserstein = 0.0;
  double divergence = 0.0;  // squared scale; empty meaning in 1D (W₂² there)
  double energy = 0.0;
  bool converged = true;
};

struct ScorematchResult {
  std::vector<DistanceRow> rows;
  std::vector<double> epoch_loss;
  scorematch::MlpScore net;
  SampleMatrix signal;  // test draws of X
  std::vector<SampleMatrix> denoised;  // per compared denoiser
};

ScorematchResult scorematch_result(const ExperimentConfig& cfg);

// Paper caption values of W for the score-matching figures, in compared order.
std::optional<std::vector<double>> caption_values(const std::string& signal);

RunOutput run_sweep(const ExperimentConfig& cfg);
RunOutput run_demo1d(const ExperimentConfig& cfg);
RunOutput run_demo2d(const ExperimentConfig& cfg);
RunOutput run_ma(const ExperimentConfig& cfg);
RunOutput run_moments(const ExperimentConfig& cfg);
RunOutput run_scorematch(const ExperimentConfig& cfg);
RunOutput run_verify(const ExperimentConfig& cfg);

RunOutput run_experiment(const ExperimentConfig& cfg);

}  // namespace denoise_lab::tools
