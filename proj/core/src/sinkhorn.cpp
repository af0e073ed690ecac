#include "denoise_lab/errors.hpp"
#include "denoise_lab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace denoise_lab::metrics {

namespace {

Matrix squared_distances(const SampleMatrix& a, const SampleMatrix& b) {
  Matrix c(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      c(i, j) = (a.row(i) - b.row(j)).squaredNorm();
    }
  }
  return c;
}

struct Transport {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Sinkhorn for uniform weights: log-domain alternating updates during ε-annealing,
// then scaling iterations at the target ε. `cost` is n×m and `cost_t` its
// transpose, so both log-domain half-steps read contiguous columns.
class LogSinkhorn {
 public:
  LogSinkhorn(const Matrix& cost, const Matrix& cost_t)
      : cost_(cost), cost_t_(cost_t),
        log_a_(-std::log(static_cast<double>(cost.rows()))),
        log_b_(-std::log(static_cast<double>(cost.cols()))),
        f_(Vector::Zero(cost.rows())),
        g_(Vector::Zero(cost.cols())),
        buffer_(std::max(cost.rows(), cost.cols())) {}

  Transport run(double eps_start, double eps_target, const SinkhornOptions& opt) {
    Transport t;
    double eps = std::max(eps_start, eps_target);
    while (eps > eps_target && t.iterations < opt.max_iter) {
      update_f(eps);
      update_g(eps);
      ++t.iterations;
      eps = std::max(eps * opt.scaling, eps_target);
    }
    t.converged = refine(eps_target, opt, t.iterations);
    t.value = f_.mean() + g_.mean();
    return t;
  }

  // Equal marginals and symmetric cost: one potential, averaged update
  // f ← ½ (f + softmin(f)), whose linearization ½(I − P) contracts quickly.
  Transport run_symmetric(double eps_start, double eps_target, const SinkhornOptions& opt) {
    Transport t;
    double eps = std::max(eps_start, eps_target);
    Vector next(f_.size());
    while (t.iterations < opt.max_iter) {
      double violation = 0.0;
      for (Eigen::Index i = 0; i < f_.size(); ++i) {
        next[i] = softmin(cost_.col(i), f_, log_a_, eps);
        violation += std::exp(log_a_) * std::abs(std::expm1((f_[i] - next[i]) / eps));
      }
      ++t.iterations;
      if (eps == eps_target && violation < opt.tolerance) {
        t.converged = true;
        break;
      }
      f_ = 0.5 * (f_ + next);
      eps = std::max(eps * opt.scaling, eps_target);
    }
    t.value = 2.0 * f_.mean();
    return t;
  }

 private:
  // Final-ε iterations in scaling form on the stabilized kernel
  // K_ij = exp((f_i + g_j − C_ij)/ε). Scalings are folded back into the
  // potentials whenever they grow large, and over-relaxation is switched on once
  // the plain contraction rate has been estimated.
  bool refine(double eps, const SinkhornOptions& opt, int& iterations) {
    const auto n = f_.size();
    const auto m = g_.size();
    const double a = 1.0 / static_cast<double>(n);
    const double b = 1.0 / static_cast<double>(m);
    Matrix kernel(n, m);
    auto rebuild = [&] {
      for (Eigen::Index j = 0; j < m; ++j) {
        kernel.col(j) = ((f_.array() + g_[j] - cost_.col(j).array()) / eps).exp().matrix();
      }
    };
    rebuild();
    Vector u = Vector::Ones(n);
    Vector v = Vector::Ones(m);
    Vector next_u(n);
    Vector next_v(m);
    double omega = 1.0;
    std::vector<double> history;
    auto absorb = [&] {
      f_.array() += eps * u.array().log();
      g_.array() += eps * v.array().log();
      u.setOnes();
      v.setOnes();
      rebuild();
    };
    auto relax = [&](Vector& x, const Vector& target) {
      if (omega == 1.0) {
        x = target;
      } else {
        x = (x.array().log() * (1.0 - omega) + target.array().log() * omega).exp().matrix();
      }
    };
    bool polished = false;
    int local = 0;
    while (iterations < opt.max_iter) {
      next_u = (b * (kernel * v)).cwiseInverse();
      relax(u, next_u);
      const Vector col = a * (kernel.transpose() * u);
      const double violation = b * (v.cwiseProduct(col).array() - 1.0).abs().sum();
      next_v = col.cwiseInverse();
      relax(v, next_v);
      ++iterations;

      const bool finite = u.allFinite() && v.allFinite() && std::isfinite(violation);
      if (!finite || u.minCoeff() <= 0.0 || v.minCoeff() <= 0.0) {
        // Underflowed rows: restart from the last absorbed potentials with an exact step.
        u.setOnes();
        v.setOnes();
        omega = 1.0;
        update_f(eps);
        update_g(eps);
        rebuild();
        history.clear();
        continue;
      }
      if (violation < opt.tolerance) {
        absorb();
        return true;
      }
      ++local;
      if (!polished && local >= 100 && violation < 1e-2) {
        polished = true;
        absorb();
        if (newton(eps, opt, iterations)) return true;
        rebuild();
        omega = 1.0;
        history.clear();
        continue;
      }
      history.push_back(violation);
      if (omega == 1.0 && history.size() == 30) {
        const double rate = std::pow(history[29] / history[19], 0.1);
        if (rate < 1.0) omega = std::min(1.9, 2.0 / (1.0 + std::sqrt(1.0 - rate)));
      } else if (omega > 1.0 && history.size() > 40 && violation > 10.0 * history[29]) {
        omega = 1.0;
        history.clear();
      }
      const double spread = std::max(u.cwiseAbs().maxCoeff(), v.cwiseAbs().maxCoeff());
      const double shrink = std::min(u.minCoeff(), v.minCoeff());
      if (spread > 1e50 || shrink < 1e-50) absorb();
    }
    absorb();
    return false;
  }

  // Newton ascent on the dual for uniform weights. The Hessian block system
  //   [diag r  P; Pᵀ diag c] (δf, δg) = ε (a − r, b − c)
  // is reduced to its Schur complement in δg and solved by Jacobi-preconditioned
  // conjugate gradients; each CG matrix-vector pair counts as one iteration.
  bool newton(double eps, const SinkhornOptions& opt, int& iterations) {
    const auto n = f_.size();
    const auto m = g_.size();
    const double a = 1.0 / static_cast<double>(n);
    const double b = 1.0 / static_cast<double>(m);
    Matrix plan(n, m);
    auto build = [&](const Vector& f, const Vector& g) {
      for (Eigen::Index j = 0; j < m; ++j) {
        plan.col(j) = (a * b) * ((f.array() + g[j] - cost_.col(j).array()) / eps).exp().matrix();
      }
      return a * f.sum() + b * g.sum() - eps * plan.sum();
    };
    double objective = build(f_, g_);
    for (int step = 0; step < 50 && iterations < opt.max_iter; ++step) {
      const Vector r = plan.rowwise().sum();
      const Vector c = plan.colwise().sum().transpose();
      const double violation =
          std::max((r.array() - a).abs().sum(), (c.array() - b).abs().sum());
      if (!std::isfinite(violation) || !(r.minCoeff() > 0.0)) return false;
      if (violation < opt.tolerance) return true;

      const Vector grad_f = eps * (a - r.array()).matrix();
      const Vector grad_g = eps * (b - c.array()).matrix();
      const Vector inv_r = r.cwiseInverse();
      const Vector rhs = grad_g - plan.transpose() * grad_f.cwiseProduct(inv_r);
      Vector diag = c - (plan.array().square().colwise() * inv_r.array()).colwise().sum().transpose().matrix();
      for (Eigen::Index j = 0; j < m; ++j) {
        if (!(diag[j] > 1e-3 * c[j])) diag[j] = c[j];
      }
      auto schur = [&](const Vector& x) -> Vector {
        return c.cwiseProduct(x) - plan.transpose() * inv_r.cwiseProduct(plan * x);
      };

      Vector x = Vector::Zero(m);
      Vector res = rhs;
      Vector z = res.cwiseQuotient(diag);
      Vector dir = z;
      double rz = res.dot(z);
      const double stop = std::min(0.1, std::sqrt(violation)) * rhs.norm();
      for (int k = 0; k < 500 && iterations < opt.max_iter && res.norm() > stop; ++k) {
        const Vector s_dir = schur(dir);
        const double curvature = dir.dot(s_dir);
        if (!(curvature > 0.0)) break;
        const double alpha = rz / curvature;
        x += alpha * dir;
        res -= alpha * s_dir;
        ++iterations;
        z = res.cwiseQuotient(diag);
        const double rz_next = res.dot(z);
        dir = z + (rz_next / rz) * dir;
        rz = rz_next;
      }
      const Vector delta_g = x;
      const Vector delta_f = (grad_f - plan * delta_g).cwiseProduct(inv_r);

      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 30; ++ls) {
        const Vector f = f_ + t * delta_f;
        const Vector g = g_ + t * delta_g;
        const double next = build(f, g);
        if (std::isfinite(next) && next >= objective - 1e-13 * (std::abs(objective) + 1.0)) {
          f_ = f;
          g_ = g;
          objective = next;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) return false;
    }
    return false;
  }

  // −ε log Σ_k exp(log w + (pot_k − c_k)/ε)
  double softmin(const Eigen::Ref<const Vector>& costs, const Vector& potential, double log_w,
                 double eps) {
    const Eigen::Index n = costs.size();
    auto tmp = buffer_.head(n);
    tmp = (potential - costs).array() / eps;
    const double top = tmp.maxCoeff();
    const double sum = (tmp - top).exp().sum();
    return -eps * (log_w + top + std::log(sum));
  }

  void update_f(double eps) {
    for (Eigen::Index i = 0; i < f_.size(); ++i) f_[i] = softmin(cost_t_.col(i), g_, log_b_, eps);
  }

  void update_g(double eps) {
    for (Eigen::Index j = 0; j < g_.size(); ++j) g_[j] = softmin(cost_.col(j), f_, log_a_, eps);
  }

  const Matrix& cost_;
  const Matrix& cost_t_;
  double log_a_;
  double log_b_;
  Vector f_;
  Vector g_;
  Eigen::ArrayXd buffer_;
};

Transport entropic_ot(const SampleMatrix& a, const SampleMatrix& b, double eps,
                      const SinkhornOptions& opt) {
  const Matrix cost = squared_distances(a, b);
  if (a.rows() == b.rows() && a == b) {
    LogSinkhorn solver(cost, cost);
    return solver.run_symmetric(cost.maxCoeff(), eps, opt);
  }
  const Matrix cost_t = cost.transpose();
  LogSinkhorn solver(cost, cost_t);
  return solver.run(cost.maxCoeff(), eps, opt);
}

double median(Matrix values) {
  auto* begin = values.data();
  auto* end = begin + values.size();
  auto* mid = begin + values.size() / 2;
  std::nth_element(begin, mid, end);
  return *mid;
}

}  // namespace

SinkhornResult sinkhorn_w2(const SampleMatrix& a, const SampleMatrix& b,
                           const SinkhornOptions& options) {
  if (a.rows() == 0 || b.rows() == 0) throw ArgumentError("sinkhorn_w2: empty sample");
  if (a.cols() != b.cols()) throw ArgumentError("sinkhorn_w2: dimension mismatch");
  if (a.rows() > 5000 || b.rows() > 5000) throw ArgumentError("sinkhorn_w2: at most 5000 points");
  if (options.epsilon < 0.0) throw ArgumentError("sinkhorn_w2: epsilon must be positive");
  if (options.max_iter < 1) throw ArgumentError("sinkhorn_w2: max_iter must be positive");
  if (!(options.scaling > 0.0 && options.scaling < 1.0)) {
    throw ArgumentError("sinkhorn_w2: scaling must lie in (0, 1)");
  }

  SinkhornResult result;
  double eps = options.epsilon;
  if (eps == 0.0) {
    const Matrix cross = squared_distances(a, b);
    double scale = median(cross);
    if (scale == 0.0) scale = cross.mean();
    if (scale == 0.0 && squared_distances(a, a).maxCoeff() == 0.0 &&
        squared_distances(b, b).maxCoeff() == 0.0) {
      // Every point coincides: both clouds are the same Dirac mass.
      result.converged = true;
      return result;
    }
    if (scale == 0.0) scale = 1.0;
    eps = 0.01 * scale;
  }
  result.epsilon = eps;

  // Identical inputs take the same path in all three problems and cancel exactly.
  const Transport ab = entropic_ot(a, b, eps, options);
  const Transport aa = entropic_ot(a, a, eps, options);
  const Transport bb = entropic_ot(b, b, eps, options);

  result.divergence = ab.value - 0.5 * (aa.value + bb.value);
  result.value = std::sqrt(std::max(result.divergence, 0.0));
  result.iterations = ab.iterations + aa.iterations + bb.iterations;
  result.converged = ab.converged && aa.converged && bb.converged;
  return result;
}

}  // namespace denoise_lab::metrics
