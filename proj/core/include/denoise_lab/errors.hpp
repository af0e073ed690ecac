#pragma once

#include <stdexcept>
#include <string>

namespace denoise_lab {

// Bad caller input: dimension mismatch, empty sample set, nonpositive count.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evaluation outside the region where a quantity is defined or trusted.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A model object violates its own construction invariants (weights, PD covariance, grid mass).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A runtime check of the small-noise / bounded-denoiser conditions failed,
// e.g. a nonpositive Jacobian determinant on the evaluation grid.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace denoise_lab
