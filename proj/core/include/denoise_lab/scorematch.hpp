#pragma once

#include "denoise_lab/score.hpp"
#include "denoise_lab/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace denoise_lab::scorematch {

/// Score network ξ: ℝᵈ → ℝᵈ.
///
///   u₀ = W_in y + b_in
///   u_l = u_{l−1} + tanh(W_l u_{l−1} + b_l),   l = 1..blocks
///   ξ  = W_out u_L + b_out
///
/// Parameters are public so fixtures can be written directly.
class MlpScore {
 public:
  // All parameters zero.
  explicit MlpScore(int dim, int width = 64, int blocks = 3);

  // Weights uniform on ±1/√fan_in, biases zero.
  static MlpScore random(int dim, Rng& rng, int width = 64, int blocks = 3);

  int dim() const noexcept { return dim_; }
  int width() const noexcept { return width_; }
  int blocks() const noexcept { return static_cast<int>(w.size()); }
  std::size_t parameter_count() const;

  // Flat view in the order W_in, b_in, (W_l, b_l)..., W_out, b_out; matrices column-major.
  Vector flatten() const;
  void assign(const Vector& flat);

  Vector forward(const Vector& y) const;
  // (∂ξ/∂y) v by forward-mode propagation.
  Vector jvp(const Vector& y, const Vector& v) const;
  // Full Jacobian, column i = jvp(y, e_i).
  Matrix jacobian(const Vector& y) const;
  double divergence(const Vector& y) const;

  Matrix w_in;
  Vector b_in;
  std::vector<Matrix> w;
  std::vector<Vector> b;
  Matrix w_out;
  Vector b_out;

 private:
  void check(const Vector& y) const;

  int dim_;
  int width_;
};

// Batch mean of ½‖ξ(y)‖² + ∇·ξ(y); one sample per row.
double loss(const MlpScore& net, const SampleMatrix& batch);

struct LossGradient {
  double loss = 0.0;
  Vector gradient;  // same layout as MlpScore::flatten
};

// Exact gradient by reverse accumulation through the forward and tangent passes.
LossGradient param_grad(const MlpScore& net, const SampleMatrix& batch);

struct TrainConfig {
  double lr = 1e-3;
  int epochs = 10;
  int batch_size = 128;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int width = 64;
  int blocks = 3;

  void validate() const;
};

struct TrainResult {
  MlpScore net;
  std::vector<double> epoch_loss;
};

// Adam on `net` with per-epoch seeded shuffling. Throws TrainingDiverged on a
// non-finite batch loss.
TrainResult train(MlpScore net, const SampleMatrix& data, const TrainConfig& cfg);
// Initializes a network from cfg.seed, then trains it.
TrainResult train(const SampleMatrix& data, const TrainConfig& cfg);

// score = ξ, score_jacobian = symmetrized exact Jacobian, grad_laplacian = central
// differences of the exact divergence with step fd_step.
score::OraclePtr learned_oracle(MlpScore net, double fd_step = 1e-3);

/// Text format, version 1:
///   denoise-lab-mlp 1
///   dim <d> width <w> blocks <L>
///   <name> <rows> <cols>
///   <rows·cols values, row-major, shortest round-trip decimal>
///   ... one such record per tensor, in flatten order
void save(const MlpScore& net, std::ostream& out);
MlpScore load(std::istream& in);
void save(const MlpScore& net, const std::string& path);
MlpScore load(const std::string& path);

}  // namespace denoise_lab::scorematch
