#include "denoise_lab/scorematch.hpp"

#include "denoise_lab/errors.hpp"
#include "denoise_lab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

namespace denoise_lab::scorematch {

MlpScore::MlpScore(int dim, int width, int blocks) : dim_(dim), width_(width) {
  if (dim < 1) throw ArgumentError("MlpScore: dim must be positive");
  if (width < 1) throw ArgumentError("MlpScore: width must be positive");
  if (blocks < 0) throw ArgumentError("MlpScore: block count must be nonnegative");
  w_in = Matrix::Zero(width, dim);
  b_in = Vector::Zero(width);
  w.assign(static_cast<std::size_t>(blocks), Matrix::Zero(width, width));
  b.assign(static_cast<std::size_t>(blocks), Vector::Zero(width));
  w_out = Matrix::Zero(dim, width);
  b_out = Vector::Zero(dim);
}

MlpScore MlpScore::random(int dim, Rng& rng, int width, int blocks) {
  MlpScore net(dim, width, blocks);
  auto fill = [&rng](Matrix& m) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = u(rng);
    }
  };
  fill(net.w_in);
  for (auto& m : net.w) fill(m);
  fill(net.w_out);
  return net;
}

std::size_t MlpScore::parameter_count() const {
  const auto d = static_cast<std::size_t>(dim_);
  const auto h = static_cast<std::size_t>(width_);
  return h * d + h + w.size() * (h * h + h) + h * d + d;
}

namespace {

template <typename Visit>
void for_each_tensor(MlpScore& net, Visit&& visit) {
  visit("w_in", net.w_in);
  visit("b_in", net.b_in);
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    visit("w_" + std::to_string(l + 1), net.w[l]);
    visit("b_" + std::to_string(l + 1), net.b[l]);
  }
  visit("w_out", net.w_out);
  visit("b_out", net.b_out);
}

}  // namespace

Vector MlpScore::flatten() const {
  Vector flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index pos = 0;
  for_each_tensor(const_cast<MlpScore&>(*this), [&](const std::string&, auto& t) {
    flat.segment(pos, t.size()) = t.reshaped();
    pos += t.size();
  });
  return flat;
}

void MlpScore::assign(const Vector& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw ArgumentError("MlpScore::assign: expected " + std::to_string(parameter_count()) +
                        " parameters, got " + std::to_string(flat.size()));
  }
  Eigen::Index pos = 0;
  for_each_tensor(*this, [&](const std::string&, auto& t) {
    t.reshaped() = flat.segment(pos, t.size());
    pos += t.size();
  });
}

void MlpScore::check(const Vector& y) const {
  if (y.size() != dim_) {
    throw ArgumentError("MlpScore: input has dimension " + std::to_string(y.size()) +
                        ", network has " + std::to_string(dim_));
  }
}

Vector MlpScore::forward(const Vector& y) const {
  check(y);
  Vector u = w_in * y + b_in;
  for (std::size_t l = 0; l < w.size(); ++l) u += (w[l] * u + b[l]).array().tanh().matrix();
  return w_out * u + b_out;
}

Vector MlpScore::jvp(const Vector& y, const Vector& v) const {
  check(y);
  check(v);
  Vector u = w_in * y + b_in;
  Vector du = w_in * v;
  for (std::size_t l = 0; l < w.size(); ++l) {
    const Eigen::ArrayXd t = (w[l] * u + b[l]).array().tanh();
    du += ((1.0 - t.square()) * (w[l] * du).array()).matrix();
    u += t.matrix();
  }
  return w_out * du;
}

Matrix MlpScore::jacobian(const Vector& y) const {
  check(y);
  Vector u = w_in * y + b_in;
  Matrix du = w_in;
  for (std::size_t l = 0; l < w.size(); ++l) {
    const Eigen::ArrayXd t = (w[l] * u + b[l]).array().tanh();
    du += ((1.0 - t.square()).matrix().asDiagonal() * (w[l] * du));
    u += t.matrix();
  }
  return w_out * du;
}

double MlpScore::divergence(const Vector& y) const { return jacobian(y).trace(); }

namespace {

// Forward and tangent passes over a batch stored one sample per column.
struct BatchPass {
  std::vector<Matrix> u;                     // u[0..L], width × N
  std::vector<Matrix> t;                     // t[l-1] = tanh(a_l)
  std::vector<std::vector<Matrix>> du;       // du[l][i], tangent along e_i
  std::vector<std::vector<Matrix>> da;       // da[l-1][i] = W_l du[l-1][i]
  Matrix xi;                                 // d × N
  Vector per_sample;                         // ½‖ξ‖² + ∇·ξ
};

BatchPass run_batch(const MlpScore& net, const Matrix& y) {
  const int d = net.dim();
  const auto n = y.cols();
  const auto L = net.w.size();
  BatchPass p;
  p.u.reserve(L + 1);
  p.u.push_back((net.w_in * y).colwise() + net.b_in);
  p.du.resize(L + 1);
  p.da.resize(L);
  for (int i = 0; i < d; ++i) p.du[0].push_back(net.w_in.col(i).replicate(1, n));
  for (std::size_t l = 0; l < L; ++l) {
    Matrix t = ((net.w[l] * p.u[l]).colwise() + net.b[l]).array().tanh().matrix();
    const Eigen::ArrayXXd deriv = 1.0 - t.array().square();
    for (int i = 0; i < d; ++i) {
      p.da[l].push_back(net.w[l] * p.du[l][static_cast<std::size_t>(i)]);
      p.du[l + 1].push_back(p.du[l][static_cast<std::size_t>(i)] +
                            (deriv * p.da[l].back().array()).matrix());
    }
    p.u.push_back(p.u[l] + t);
    p.t.push_back(std::move(t));
  }
  p.xi = (net.w_out * p.u.back()).colwise() + net.b_out;
  p.per_sample = 0.5 * p.xi.colwise().squaredNorm().transpose();
  for (int i = 0; i < d; ++i) {
    p.per_sample += (net.w_out.row(i) * p.du[L][static_cast<std::size_t>(i)]).transpose();
  }
  return p;
}

void check_batch(const MlpScore& net, const SampleMatrix& batch, const char* who) {
  if (batch.rows() == 0) throw ArgumentError(std::string(who) + ": empty batch");
  if (batch.cols() != net.dim()) throw ArgumentError(std::string(who) + ": dimension mismatch");
}

}  // namespace

double loss(const MlpScore& net, const SampleMatrix& batch) {
  check_batch(net, batch, "loss");
  return run_batch(net, batch.transpose()).per_sample.mean();
}

LossGradient param_grad(const MlpScore& net, const SampleMatrix& batch) {
  check_batch(net, batch, "param_grad");
  const Matrix y = batch.transpose();
  const BatchPass p = run_batch(net, y);
  const int d = net.dim();
  const auto n = y.cols();
  const auto L = net.w.size();
  const double scale = 1.0 / static_cast<double>(n);

  MlpScore grad(d, net.width(), net.blocks());

  const Matrix xi_bar = scale * p.xi;
  grad.w_out = xi_bar * p.u[L].transpose();
  grad.b_out = xi_bar.rowwise().sum();
  for (int i = 0; i < d; ++i) {
    grad.w_out.row(i) += scale * p.du[L][static_cast<std::size_t>(i)].rowwise().sum().transpose();
  }

  Matrix u_bar = net.w_out.transpose() * xi_bar;
  std::vector<Matrix> du_bar;
  for (int i = 0; i < d; ++i) {
    du_bar.push_back((scale * net.w_out.row(i).transpose()).replicate(1, n));
  }

  for (std::size_t l = L; l-- > 0;) {
    const Eigen::ArrayXXd t = p.t[l].array();
    const Eigen::ArrayXXd deriv = 1.0 - t.square();
    Eigen::ArrayXXd curvature = Eigen::ArrayXXd::Zero(t.rows(), t.cols());
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      curvature += du_bar[k].array() * p.da[l][k].array();
    }
    const Matrix a_bar = (u_bar.array() * deriv - 2.0 * curvature * t * deriv).matrix();
    grad.w[l] = a_bar * p.u[l].transpose();
    grad.b[l] = a_bar.rowwise().sum();
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const Matrix a_dot_bar = (du_bar[k].array() * deriv).matrix();
      grad.w[l] += a_dot_bar * p.du[l][k].transpose();
      du_bar[k] += net.w[l].transpose() * a_dot_bar;
    }
    u_bar += net.w[l].transpose() * a_bar;
  }

  grad.w_in = u_bar * y.transpose();
  grad.b_in = u_bar.rowwise().sum();
  for (int i = 0; i < d; ++i) {
    grad.w_in.col(i) += du_bar[static_cast<std::size_t>(i)].rowwise().sum();
  }

  return {p.per_sample.mean(), grad.flatten()};
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ArgumentError("TrainConfig: lr must be positive");
  if (epochs < 1) throw ArgumentError("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw ArgumentError("TrainConfig: batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ArgumentError("TrainConfig: Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ArgumentError("TrainConfig: adam_eps must be positive");
  if (width < 1 || blocks < 0) throw ArgumentError("TrainConfig: bad architecture");
}

TrainResult train(MlpScore net, const SampleMatrix& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.rows() == 0) throw ArgumentError("train: empty data");
  if (data.cols() != net.dim()) throw ArgumentError("train: dimension mismatch");

  Rng rng(cfg.seed ^ 0x5deece66dULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  Vector theta = net.flatten();
  Vector m = Vector::Zero(theta.size());
  Vector v = Vector::Zero(theta.size());
  long step = 0;
  TrainResult result{net, {}};
  SampleMatrix batch;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.resize(static_cast<Eigen::Index>(stop - start), data.cols());
      for (std::size_t k = start; k < stop; ++k) {
        batch.row(static_cast<Eigen::Index>(k - start)) = data.row(order[k]);
      }
      net.assign(theta);
      const LossGradient lg = param_grad(net, batch);
      if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
        throw TrainingDiverged(epoch, "train: non-finite loss in epoch " + std::to_string(epoch));
      }
      total += lg.loss * static_cast<double>(stop - start);
      ++step;
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * lg.gradient;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * lg.gradient.cwiseProduct(lg.gradient);
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      theta.array() -= cfg.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.adam_eps);
    }
    result.epoch_loss.push_back(total / static_cast<double>(order.size()));
  }
  net.assign(theta);
  result.net = std::move(net);
  return result;
}

TrainResult train(const SampleMatrix& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.cols() < 1) throw ArgumentError("train: data has no columns");
  Rng rng(cfg.seed);
  return train(MlpScore::random(static_cast<int>(data.cols()), rng, cfg.width, cfg.blocks), data,
               cfg);
}

namespace {

class LearnedOracle final : public score::ScoreOracle {
 public:
  LearnedOracle(MlpScore net, double h) : net_(std::move(net)), h_(h) {}

  int dim() const override { return net_.dim(); }
  Vector score(const Vector& y) const override { return net_.forward(y); }
  Matrix score_jacobian(const Vector& y) const override {
    const Matrix J = net_.jacobian(y);
    return 0.5 * (J + J.transpose());
  }
  Vector grad_laplacian(const Vector& y) const override {
    Vector out(y.size());
    Vector shifted = y;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      shifted[i] = y[i] + h_;
      const double up = net_.divergence(shifted);
      shifted[i] = y[i] - h_;
      const double down = net_.divergence(shifted);
      shifted[i] = y[i];
      out[i] = (up - down) / (2.0 * h_);
    }
    return out;
  }

 private:
  MlpScore net_;
  double h_;
};

constexpr const char* kMagic = "denoise-lab-mlp";
constexpr int kFormatVersion = 1;

}  // namespace

score::OraclePtr learned_oracle(MlpScore net, double fd_step) {
  if (!(fd_step > 0.0)) throw ArgumentError("learned_oracle: fd_step must be positive");
  return std::make_shared<const LearnedOracle>(std::move(net), fd_step);
}

void save(const MlpScore& net, std::ostream& out) {
  out << kMagic << ' ' << kFormatVersion << '\n'
      << "dim " << net.dim() << " width " << net.width() << " blocks " << net.blocks() << '\n';
  for_each_tensor(const_cast<MlpScore&>(net), [&](const std::string& name, const auto& t) {
    out << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        if (j > 0) out << ' ';
        out << metrics::format_double(t(i, j));
      }
      out << '\n';
    }
  });
  if (!out) throw ModelError("save: write failed");
}

MlpScore load(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) {
    throw ModelError("load: not a denoise-lab MLP parameter file");
  }
  if (version != kFormatVersion) {
    throw ModelError("load: unsupported format version " + std::to_string(version));
  }
  std::string k1, k2, k3;
  int dim = 0, width = 0, blocks = 0;
  if (!(in >> k1 >> dim >> k2 >> width >> k3 >> blocks) || k1 != "dim" || k2 != "width" ||
      k3 != "blocks" || dim < 1 || width < 1 || blocks < 0) {
    throw ModelError("load: malformed shape line");
  }
  MlpScore net(dim, width, blocks);
  for_each_tensor(net, [&](const std::string& name, auto& t) {
    std::string got;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> got >> rows >> cols) || got != name || rows != t.rows() || cols != t.cols()) {
      throw ModelError("load: expected tensor " + name + " with shape " +
                       std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!(in >> t(i, j))) throw ModelError("load: truncated values in tensor " + name);
      }
    }
  });
  return net;
}

void save(const MlpScore& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("save: cannot open " + path);
  save(net, out);
}

MlpScore load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("load: cannot open " + path);
  return load(in);
}

}  // namespace denoise_lab::scorematch
