#include "denoise_lab/tools/experiments.hpp"

#include "denoise_lab/errors.hpp"
#include "denoise_lab/grid.hpp"
#include "denoise_lab/verify.hpp"
#include "denoise_lab/tools/signals.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

namespace denoise_lab::tools {

namespace {

using metrics::format_double;

const std::string kSignalColor = "#7f7f7f";

std::string num(double v) { return format_double(v); }

denoise::Denoiser make_denoiser(DenoiserKind kind, double eta, const score::OraclePtr& oracle,
                                int dim) {
  if (kind == DenoiserKind::Identity) return denoise::Denoiser::identity(dim);
  return {kind, eta, oracle, dim};
}

Signal analytic_signal(const ExperimentConfig& cfg, std::optional<int> dim) {
  Signal sig = make_signal(cfg.signal);
  const std::string name = to_string(cfg.experiment);
  if (!sig.mixture) {
    throw ConfigError("config field 'signal.kind': " + name +
                      " needs an analytic signal (normal, mixture, gauss or mixture2)");
  }
  if (dim && sig.dim != *dim) {
    throw ConfigError("config field 'signal': " + name + " needs a " + std::to_string(*dim) +
                      "-dimensional signal");
  }
  return sig;
}

void require_gaussian_noise(const ExperimentConfig& cfg) {
  if (cfg.noise != "gaussian") {
    throw ConfigError("config field 'noise': " + to_string(cfg.experiment) + " requires gaussian noise");
  }
}

double mean_1d(const models::GaussianMixture& p) { return p.mean()[0]; }

double sd_1d(const models::GaussianMixture& p) {
  const double m = mean_1d(p);
  return std::sqrt(std::max(p.second_moment()(0, 0) - m * m, 0.0));
}

double distance_1d_or_sinkhorn(const SampleMatrix& a, const SampleMatrix& b) {
  if (a.cols() == 1) return metrics::wasserstein_1d(a, b, 2);
  return metrics::sinkhorn_w2(a, b).value;
}

void monte_carlo_moment(const denoise::Denoiser& den, const SampleMatrix& y, const Matrix& reference,
                        double& rel_err, double& se) {
  const auto d = y.cols();
  Matrix sum = Matrix::Zero(d, d);
  Matrix sum_sq = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const Vector t = den.apply(y.row(i).transpose());
    const Matrix outer = t * t.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
  }
  const double n = static_cast<double>(y.rows());
  const Matrix moment = sum / n;
  const Matrix var = (sum_sq / n - moment.cwiseProduct(moment)).cwiseMax(0.0);
  const double scale = reference.norm();
  rel_err = metrics::relative_second_moment_error(moment, reference);
  se = std::sqrt(var.sum() / n) / scale;
}

// 1D p discretized wide enough for the uniform-noise grid oracle.
struct UniformNoiseSetup {
  models::Grid1D p_grid;
  double quad_lo;
  double quad_hi;
};

UniformNoiseSetup uniform_setup(const models::GaussianMixture& p) {
  const double m = mean_1d(p);
  const double scale = std::max(1.0, sd_1d(p));
  auto density = [&](double x) { return p.density(Vector::Constant(1, x)); };
  return {models::Grid1D::sample(m - 14.0 * scale, m + 14.0 * scale, 4097, density),
          m - 12.0 * scale, m + 12.0 * scale};
}

struct NoisyLaw {
  score::OraclePtr oracle;
  metrics::DensityFn density;
};

NoisyLaw noisy_law_1d(const models::GaussianMixture& p, const ExperimentConfig& cfg,
                      const std::optional<UniformNoiseSetup>& uniform, double eta) {
  if (eta == 0.0 || !uniform) {
    auto o = score::mixture_oracle(models::noisy_mixture(p, eta));
    return {o, [o](const Vector& y) { return o->density(y); }};
  }
  const auto q = models::convolve_density_1d(uniform->p_grid, noise_model(cfg, 1), eta);
  auto o = score::grid_oracle_1d(q);
  return {o, [o](const Vector& y) { return o->density(y[0]); }};
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double silverman_bandwidth(std::vector<double> v) {
  const auto n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / std::max(n - 1.0, 1.0));
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const auto j = std::min(i + 1, v.size() - 1);
    return v[i] + (pos - std::floor(pos)) * (v[j] - v[i]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  if (!(spread > 0.0)) spread = 1.0;
  return 0.9 * spread * std::pow(n, -0.2);
}

std::vector<double> gaussian_kde(const std::vector<double>& data, const std::vector<double>& at) {
  const double h = silverman_bandwidth(data);
  const double norm = 1.0 / (static_cast<double>(data.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(at.size(), 0.0);
  for (std::size_t i = 0; i < at.size(); ++i) {
    double s = 0.0;
    for (double x : data) {
      const double u = (at[i] - x) / h;
      s += std::exp(-0.5 * u * u);
    }
    out[i] = s * norm;
  }
  return out;
}

std::vector<double> column(const SampleMatrix& m, Eigen::Index c) {
  return {m.col(c).data(), m.col(c).data() + m.rows()};
}

Table slope_table(const std::string& name, const std::vector<SlopeRow>& slopes) {
  Table t{name, {"denoiser", "slope", "r2", "points"}, {}};
  for (const auto& s : slopes) {
    t.add({std::string(denoise::to_string(s.kind)), s.fit ? num(s.fit->slope) : "",
           s.fit ? num(s.fit->r2) : "", std::to_string(s.points)});
  }
  return t;
}

void summarize_slopes(RunOutput& out, const std::string& what, const std::vector<SlopeRow>& slopes) {
  for (const auto& s : slopes) {
    std::ostringstream line;
    line << what << " slope " << info(s.kind).label << ": ";
    if (s.fit) {
      line << num(s.fit->slope) << " (r2 " << num(s.fit->r2) << ")";
    } else {
      line << "n/a (" << s.points << " usable points)";
    }
    out.summary.push_back(line.str());
  }
}

Plot rate_plot(const std::string& name, const std::string& title, const std::string& y_label,
               const std::vector<RateRow>& rows) {
  Plot plot{name, title, "eta", y_label, true, true, PlotKind::Line, {}};
  for (const auto& d : compared_denoisers()) {
    Series s{d.label, d.color, {}, {}};
    for (const auto& r : rows) {
      if (r.kind != d.kind || !r.value) continue;
      s.x.push_back(r.eta);
      s.y.push_back(std::abs(*r.value));
    }
    plot.series.push_back(std::move(s));
  }
  return plot;
}

// The small-noise condition is stated for the first- and second-order maps only.
std::optional<denoise::SmallNoiseReport> jacobian_check(const denoise::Denoiser& den,
                                                        const SampleMatrix& grid) {
  if (den.kind() != DenoiserKind::FirstOrder && den.kind() != DenoiserKind::SecondOrder) {
    return std::nullopt;
  }
  return denoise::check_small_noise(den, grid);
}

SampleMatrix evaluation_grid_2d(const models::GaussianMixture& q, int per_axis) {
  const Vector m = q.mean();
  const Matrix cov = q.second_moment() - m * m.transpose();
  SampleMatrix grid(per_axis * per_axis, 2);
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      const double u = -1.0 + 2.0 * i / (per_axis - 1);
      const double v = -1.0 + 2.0 * j / (per_axis - 1);
      grid(i * per_axis + j, 0) = m[0] + 4.0 * std::sqrt(cov(0, 0)) * u;
      grid(i * per_axis + j, 1) = m[1] + 4.0 * std::sqrt(cov(1, 1)) * v;
    }
  }
  return grid;
}

Plot scatter_plot(const std::string& name, const std::string& title, const SampleMatrix& signal,
                  const SampleMatrix& denoised, const DenoiserInfo& d, const std::string& note) {
  Plot plot{name, title, "x1", "x2", false, false, PlotKind::Scatter, {}};
  plot.series.push_back({"signal samples", kSignalColor, column(signal, 0), column(signal, 1)});
  plot.series.push_back({d.label + " " + note, d.color, column(denoised, 0), column(denoised, 1)});
  return plot;
}

}  // namespace

const std::vector<DenoiserInfo>& compared_denoisers() {
  static const std::vector<DenoiserInfo> list = {
      {DenoiserKind::Identity, "Identity", "#1f77b4"},
      {DenoiserKind::Bayes, "Bayes", "#ff7f0e"},
      {DenoiserKind::FirstOrder, "T1", "#2ca02c"},
      {DenoiserKind::SecondOrder, "T2", "#d62728"},
  };
  return list;
}

const DenoiserInfo& info(DenoiserKind kind) {
  for (const auto& d : compared_denoisers()) {
    if (d.kind == kind) return d;
  }
  throw ArgumentError("no plotting info for denoiser " + std::string(denoise::to_string(kind)));
}

Matrix gaussian_pushforward_second_moment(const models::GaussianMixture& p, DenoiserKind kind,
                                          double eta) {
  if (p.size() != 1) throw ArgumentError("closed-form second moment needs a single Gaussian");
  const auto d = p.dim();
  const Vector mu = p.component(0).mean;
  const Matrix s = p.component(0).covariance + 2.0 * eta * Matrix::Identity(d, d);
  const Matrix s_inv = s.inverse();
  const Matrix id = Matrix::Identity(d, d);
  Matrix m;
  switch (kind) {
    case DenoiserKind::Identity: m = id; break;
    case DenoiserKind::Bayes: m = id - 2.0 * eta * s_inv; break;
    case DenoiserKind::FirstOrder: m = id - eta * s_inv; break;
    case DenoiserKind::SecondOrder: m = id - eta * s_inv - 0.5 * eta * eta * s_inv * s_inv; break;
    default: throw ArgumentError("closed-form second moment: unsupported denoiser");
  }
  return mu * mu.transpose() + m * s * m.transpose();
}

std::vector<SweepRow> sweep_rows(const ExperimentConfig& cfg) {
  const Signal sig = analytic_signal(cfg, std::nullopt);
  require_gaussian_noise(cfg);
  const auto& p = *sig.mixture;
  const bool single = p.size() == 1;
  const bool closed = cfg.second_moment == "closed_form" || (cfg.second_moment == "auto" && single);
  if (closed && !single) {
    throw ConfigError("config field 'second_moment': closed_form needs a single Gaussian signal");
  }
  const Matrix reference = p.second_moment();
  const auto noise = noise_model(cfg, sig.dim);

  std::vector<std::vector<SweepRow>> per_eta(cfg.etas.size());
  std::vector<std::exception_ptr> errors(cfg.etas.size());
  auto work = [&](std::size_t i) {
    try {
      const double eta = cfg.etas[i];
      Rng rng(cfg.seed ^ static_cast<std::uint64_t>(i));
      const auto oracle = score::mixture_oracle(models::noisy_mixture(p, eta));
      const SampleMatrix x = sig.sample(cfg.n_test, rng);
      const SampleMatrix y = add_noise(x, noise, eta, rng);
      SampleMatrix y_mc;
      if (!closed) y_mc = add_noise(sig.sample(cfg.n_mc, rng), noise, eta, rng);
      for (const auto& d : compared_denoisers()) {
        const auto den = make_denoiser(d.kind, eta, oracle, sig.dim);
        SweepRow row;
        row.eta = eta;
        row.kind = d.kind;
        row.closed_form = closed;
        if (closed) {
          row.second_moment_rel_err = metrics::relative_second_moment_error(
              gaussian_pushforward_second_moment(p, d.kind, eta), reference);
        } else {
          monte_carlo_moment(den, y_mc, reference, row.second_moment_rel_err, row.second_moment_se);
        }
        const SampleMatrix ty = denoise::push_forward(den, y);
        row.wasserstein = distance_1d_or_sinkhorn(ty, x);
        row.energy = metrics::energy_distance(ty, x);
        per_eta[i].push_back(row);
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < cfg.etas.size(); ++i) threads.emplace_back(work, i);
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<SweepRow> rows;
  for (const auto& v : per_eta) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

std::vector<SlopeRow> fit_slopes(const std::vector<RateRow>& rows) {
  std::vector<SlopeRow> out;
  for (const auto& d : compared_denoisers()) {
    std::vector<double> etas;
    std::vector<double> values;
    bool present = false;
    for (const auto& r : rows) {
      if (r.kind != d.kind) continue;
      present = true;
      if (r.eta > 0.0 && r.value && *r.value != 0.0) {
        etas.push_back(r.eta);
        values.push_back(std::abs(*r.value));
      }
    }
    if (!present) continue;
    SlopeRow s;
    s.kind = d.kind;
    s.points = etas.size();
    if (etas.size() >= 4) s.fit = metrics::fit_slope(etas, values);
    out.push_back(s);
  }
  return out;
}

std::vector<RateRow> ma_rows(const ExperimentConfig& cfg) {
  const Signal sig = analytic_signal(cfg, 1);
  const auto& p = *sig.mixture;
  std::optional<UniformNoiseSetup> uniform;
  if (cfg.noise == "uniform") uniform = uniform_setup(p);
  const double m = mean_1d(p);
  const double var = sd_1d(p) * sd_1d(p);
  const metrics::DensityFn p_density = [&p](const Vector& x) { return p.density(x); };

  std::vector<RateRow> rows;
  for (double eta : cfg.etas) {
    const NoisyLaw law = noisy_law_1d(p, cfg, uniform, eta);
    const double half = 4.0 * std::sqrt(var + 2.0 * eta);
    SampleMatrix grid(static_cast<Eigen::Index>(cfg.ma_points), 1);
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
      grid(i, 0) = m - half + 2.0 * half * static_cast<double>(i) / static_cast<double>(grid.rows() - 1);
    }
    for (const auto& d : compared_denoisers()) {
      RateRow row;
      row.eta = eta;
      row.kind = d.kind;
      try {
        row.value = metrics::ma_residual(make_denoiser(d.kind, eta, law.oracle, 1), p_density,
                                         law.density, grid);
      } catch (const AssumptionViolation& e) {
        row.status = std::string("assumption_violation: ") + e.what();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

metrics::QuadratureGrid quadrature_for(const models::GaussianMixture& p,
                                       const std::optional<UniformNoiseSetup>& uniform) {
  metrics::QuadratureGrid grid;
  if (uniform) {
    grid.lo = uniform->quad_lo;
    grid.hi = uniform->quad_hi;
  } else {
    const double scale = std::max(1.0, sd_1d(p));
    grid.lo = mean_1d(p) - 12.0 * scale;
    grid.hi = mean_1d(p) + 12.0 * scale;
  }
  return grid;
}

}  // namespace

std::vector<RateRow> moment_rows(const ExperimentConfig& cfg) {
  const Signal sig = analytic_signal(cfg, 1);
  const auto& p = *sig.mixture;
  std::optional<UniformNoiseSetup> uniform;
  if (cfg.noise == "uniform") uniform = uniform_setup(p);
  const auto grid = quadrature_for(p, uniform);
  const metrics::DensityFn p_density = [&p](const Vector& x) { return p.density(x); };

  std::vector<RateRow> rows;
  for (double eta : cfg.etas) {
    const NoisyLaw law = noisy_law_1d(p, cfg, uniform, eta);
    for (const auto& d : compared_denoisers()) {
      RateRow row;
      row.eta = eta;
      row.kind = d.kind;
      row.value = metrics::moment_error_quadrature_1d(
          cfg.bump, make_denoiser(d.kind, eta, law.oracle, 1), p_density, law.density, grid);
      rows.push_back(row);
    }
  }
  return rows;
}

double moment_leading_integral(const ExperimentConfig& cfg) {
  const Signal sig = analytic_signal(cfg, 1);
  const auto& p = *sig.mixture;
  std::optional<UniformNoiseSetup> uniform;
  if (cfg.noise == "uniform") uniform = uniform_setup(p);
  Vector x(1);
  return metrics::trapezoid_1d(
      [&](double t) {
        x[0] = t;
        return -metrics::bump_hess(cfg.bump, x)(0, 0) * p.density(x);
      },
      quadrature_for(p, uniform));
}

std::optional<std::vector<double>> caption_values(const std::string& signal) {
  if (signal == "gauss") return std::vector<double>{0.274, 0.169, 0.046, 0.038};
  if (signal == "mixture2") return std::vector<double>{0.233, 0.214, 0.050, 0.038};
  if (signal == "square") return std::vector<double>{0.237, 0.262, 0.081, 0.071};
  if (signal == "torus") return std::vector<double>{0.196, 0.138, 0.063, 0.050};
  return std::nullopt;
}

ScorematchResult scorematch_result(const ExperimentConfig& cfg) {
  const Signal sig = make_signal(cfg.signal);
  if (cfg.n_test > 5000) throw ConfigError("config field 'n_test' must be at most 5000 for scorematch");
  const auto noise = noise_model(cfg, sig.dim);
  Rng rng(cfg.seed);
  const SampleMatrix y_train = add_noise(sig.sample(cfg.n_train, rng), noise, cfg.eta, rng);
  scorematch::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  auto trained = scorematch::train(y_train, tc);

  ScorematchResult result{{}, trained.epoch_loss, trained.net, sig.sample(cfg.n_test, rng), {}};
  const SampleMatrix y = add_noise(result.signal, noise, cfg.eta, rng);
  const auto oracle = scorematch::learned_oracle(trained.net);
  for (const auto& d : compared_denoisers()) {
    const auto den = make_denoiser(d.kind, cfg.eta, oracle, sig.dim);
    SampleMatrix ty = denoise::push_forward(den, y);
    const auto s = metrics::sinkhorn_w2(ty, result.signal);
    result.rows.push_back({d.kind, s.value, s.divergence, metrics::energy_distance(ty, result.signal),
                           s.converged});
    result.denoised.push_back(std::move(ty));
  }
  return result;
}

RunOutput run_sweep(const ExperimentConfig& cfg) {
  const auto rows = sweep_rows(cfg);
  RunOutput out;
  out.experiment = "sweep";
  Table t{"sweep",
          {"eta", "denoiser", "second_moment_rel_err", "second_moment_se", "method", "wasserstein",
           "energy"},
          {}};
  for (const auto& r : rows) {
    t.add({num(r.eta), std::string(denoise::to_string(r.kind)), num(r.second_moment_rel_err),
           num(r.second_moment_se), r.closed_form ? "closed_form" : "monte_carlo", num(r.wasserstein),
           num(r.energy)});
  }
  out.tables.push_back(std::move(t));

  struct Metric {
    std::string key;
    std::string title;
    double SweepRow::*field;
  };
  const std::vector<Metric> metrics_list = {
      {"second_moment", "Relative second-moment error", &SweepRow::second_moment_rel_err},
      {"wasserstein", "Wasserstein distance to signal samples", &SweepRow::wasserstein},
      {"energy", "Energy distance to signal samples", &SweepRow::energy},
  };
  Table slopes{"sweep_slopes", {"metric", "denoiser", "slope", "r2", "points"}, {}};
  for (const auto& m : metrics_list) {
    std::vector<RateRow> rate;
    for (const auto& r : rows) rate.push_back({r.eta, r.kind, r.*(m.field), "ok"});
    out.plots.push_back(rate_plot("sweep_" + m.key, m.title, m.key, rate));
    const auto fits = fit_slopes(rate);
    for (const auto& s : fits) {
      slopes.add({m.key, std::string(denoise::to_string(s.kind)), s.fit ? num(s.fit->slope) : "",
                  s.fit ? num(s.fit->r2) : "", std::to_string(s.points)});
    }
    summarize_slopes(out, m.key, fits);
  }
  out.tables.push_back(std::move(slopes));
  return out;
}

RunOutput run_demo1d(const ExperimentConfig& cfg) {
  const Signal sig = analytic_signal(cfg, 1);
  require_gaussian_noise(cfg);
  const auto& p = *sig.mixture;
  Rng rng(cfg.seed);
  const SampleMatrix x = sig.sample(cfg.n_test, rng);
  const SampleMatrix y = add_noise(x, noise_model(cfg, 1), cfg.eta, rng);
  const auto q = models::noisy_mixture(p, cfg.eta);
  const auto oracle = score::mixture_oracle(q);

  const double m = mean_1d(q);
  const double half = 4.0 * sd_1d(q);
  SampleMatrix check_grid(401, 1);
  for (Eigen::Index i = 0; i < 401; ++i) check_grid(i, 0) = m - half + 2.0 * half * static_cast<double>(i) / 400.0;

  RunOutput out;
  out.experiment = "demo1d";
  Table t{"demo1d", {"denoiser", "wasserstein", "energy", "min_jacobian_eig", "jacobian_positive"}, {}};
  std::vector<SampleMatrix> denoised;
  std::vector<std::string> notes;
  for (const auto& d : compared_denoisers()) {
    const auto den = make_denoiser(d.kind, cfg.eta, oracle, 1);
    SampleMatrix ty = denoise::push_forward(den, y);
    const double w = metrics::wasserstein_1d(ty, x, 2);
    const double e = metrics::energy_distance(ty, x);
    const auto check = jacobian_check(den, check_grid);
    if (check && !check->ok) {
      ++out.assumption_violations;
      out.summary.push_back("assumption violation: " + d.label + " Jacobian not positive on the grid (min " +
                            num(check->min_eig) + ")");
    }
    t.add({std::string(denoise::to_string(d.kind)), num(w), num(e), check ? num(check->min_eig) : "",
           check ? (check->ok ? "true" : "false") : ""});
    std::ostringstream note;
    note.precision(3);
    note << "W=" << w << " E=" << e;
    notes.push_back(note.str());
    out.summary.push_back(d.label + ": " + note.str());
    denoised.push_back(std::move(ty));
  }
  out.tables.push_back(std::move(t));

  double lo = x.minCoeff();
  double hi = x.maxCoeff();
  for (const auto& s : denoised) {
    lo = std::min(lo, s.minCoeff());
    hi = std::max(hi, s.maxCoeff());
  }
  std::vector<double> at(400);
  for (std::size_t i = 0; i < at.size(); ++i) at[i] = lo + (hi - lo) * static_cast<double>(i) / 399.0;
  Table kde{"demo1d_kde", {"x", "signal"}, {}};
  std::vector<std::vector<double>> curves{gaussian_kde(column(x, 0), at)};
  for (std::size_t k = 0; k < denoised.size(); ++k) {
    kde.header.push_back(std::string(denoise::to_string(compared_denoisers()[k].kind)));
    curves.push_back(gaussian_kde(column(denoised[k], 0), at));
  }
  for (std::size_t i = 0; i < at.size(); ++i) {
    std::vector<std::string> row{num(at[i])};
    for (const auto& c : curves) row.push_back(num(c[i]));
    kde.add(std::move(row));
  }
  out.tables.push_back(std::move(kde));

  Plot plot{"demo1d_density", "Kernel density of denoised samples, eta = " + num(cfg.eta), "x",
            "density", false, false, PlotKind::Line, {}};
  plot.series.push_back({"signal samples", kSignalColor, at, curves[0]});
  for (std::size_t k = 0; k < denoised.size(); ++k) {
    const auto& d = compared_denoisers()[k];
    plot.series.push_back({d.label + " " + notes[k], d.color, at, curves[k + 1]});
  }
  out.plots.push_back(std::move(plot));
  return out;
}

RunOutput run_demo2d(const ExperimentConfig& cfg) {
  const Signal sig = analytic_signal(cfg, 2);
  require_gaussian_noise(cfg);
  const auto& p = *sig.mixture;
  Rng rng(cfg.seed);
  const SampleMatrix x = sig.sample(cfg.n_test, rng);
  const SampleMatrix y = add_noise(x, noise_model(cfg, 2), cfg.eta, rng);
  const auto q = models::noisy_mixture(p, cfg.eta);
  const auto oracle = score::mixture_oracle(q);
  const SampleMatrix check_grid = evaluation_grid_2d(q, 41);

  RunOutput out;
  out.experiment = "demo2d";
  Table t{"demo2d",
          {"denoiser", "wasserstein", "half_w2_sq", "energy", "converged", "min_jacobian_eig",
           "jacobian_positive"},
          {}};
  for (const auto& d : compared_denoisers()) {
    const auto den = make_denoiser(d.kind, cfg.eta, oracle, 2);
    const SampleMatrix ty = denoise::push_forward(den, y);
    const auto s = metrics::sinkhorn_w2(ty, x);
    const double e = metrics::energy_distance(ty, x);
    const auto check = jacobian_check(den, check_grid);
    if (check && !check->ok) {
      ++out.assumption_violations;
      out.summary.push_back("assumption violation: " + d.label + " Jacobian not positive on the grid (min " +
                            num(check->min_eig) + ")");
    }
    t.add({std::string(denoise::to_string(d.kind)), num(s.value), num(0.5 * s.divergence), num(e),
           s.converged ? "true" : "false", check ? num(check->min_eig) : "", check ? (check->ok ? "true" : "false") : ""});
    std::ostringstream note;
    note.precision(3);
    note << "W=" << s.value << " E=" << e;
    out.summary.push_back(d.label + ": " + note.str());
    out.plots.push_back(scatter_plot("demo2d_" + std::string(denoise::to_string(d.kind)),
                                     d.label + " denoiser, eta = " + num(cfg.eta), x, ty, d, note.str()));
  }
  out.tables.push_back(std::move(t));
  return out;
}

RunOutput run_ma(const ExperimentConfig& cfg) {
  const auto rows = ma_rows(cfg);
  RunOutput out;
  out.experiment = "ma";
  Table t{"ma", {"eta", "denoiser", "ma_residual", "status"}, {}};
  for (const auto& r : rows) {
    if (r.status != "ok") {
      ++out.assumption_violations;
      out.summary.push_back("eta " + num(r.eta) + " " + info(r.kind).label + ": " + r.status);
    }
    t.add({num(r.eta), std::string(denoise::to_string(r.kind)), r.value ? num(*r.value) : "", r.status});
  }
  out.tables.push_back(std::move(t));
  const auto slopes = fit_slopes(rows);
  out.tables.push_back(slope_table("ma_slopes", slopes));
  summarize_slopes(out, "ma_residual", slopes);
  out.plots.push_back(rate_plot("ma_residual", "Monge-Ampere residual (" + cfg.noise + " noise)",
                                "sup |q - p(T) det DT|", rows));
  return out;
}

RunOutput run_moments(const ExperimentConfig& cfg) {
  const auto rows = moment_rows(cfg);
  const double leading = moment_leading_integral(cfg);
  RunOutput out;
  out.experiment = "moments";
  Table t{"moments", {"eta", "denoiser", "moment_error", "error_over_eta"}, {}};
  for (const auto& r : rows) {
    t.add({num(r.eta), std::string(denoise::to_string(r.kind)), num(*r.value),
           r.eta > 0.0 ? num(*r.value / r.eta) : ""});
  }
  out.tables.push_back(std::move(t));
  const auto slopes = fit_slopes(rows);
  out.tables.push_back(slope_table("moments_slopes", slopes));
  Table lead{"moments_leading", {"quantity", "value"}, {}};
  lead.add({"bayes_leading_integral", num(leading)});
  out.tables.push_back(std::move(lead));
  summarize_slopes(out, "moment_error", slopes);
  out.summary.push_back("Bayes leading integral -int m'' p = " + num(leading));
  out.plots.push_back(rate_plot("moments_error", "Bump moment error (" + cfg.noise + " noise)",
                                "|E m(T(Y)) - E m(X)|", rows));
  return out;
}

RunOutput run_scorematch(const ExperimentConfig& cfg) {
  const auto result = scorematch_result(cfg);
  const auto caption = caption_values(cfg.signal.kind);
  RunOutput out;
  out.experiment = "scorematch";
  Table t{"scorematch",
          {"denoiser", "wasserstein", "half_w2_sq", "energy", "converged", "caption_w",
           "half_w2_sq_within_60pct"},
          {}};
  for (std::size_t k = 0; k < result.rows.size(); ++k) {
    const auto& r = result.rows[k];
    const auto& d = compared_denoisers()[k];
    const double half = 0.5 * r.divergence;
    std::string cap;
    std::string within;
    if (caption) {
      cap = num((*caption)[k]);
      within = std::abs(half - (*caption)[k]) <= 0.6 * (*caption)[k] ? "true" : "false";
    }
    t.add({std::string(denoise::to_string(r.kind)), num(r.wasserstein), num(half), num(r.energy),
           r.converged ? "true" : "false", cap, within});
    std::ostringstream note;
    note.precision(3);
    note << "W=" << r.wasserstein;
    out.summary.push_back(d.label + ": " + note.str() + " half_w2_sq=" + num(half));
    if (result.signal.cols() == 2) {
      out.plots.push_back(scatter_plot("scorematch_" + std::string(denoise::to_string(d.kind)),
                                       d.label + " with learned score, signal " + cfg.signal.kind,
                                       result.signal, result.denoised[k], d, note.str()));
    }
  }
  out.tables.push_back(std::move(t));
  Table loss{"scorematch_loss", {"epoch", "loss"}, {}};
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    loss.add({std::to_string(e + 1), num(result.epoch_loss[e])});
  }
  out.tables.push_back(std::move(loss));
  std::ostringstream model;
  scorematch::save(result.net, model);
  out.files.emplace_back("scorematch_model.txt", model.str());
  return out;
}

RunOutput run_verify(const ExperimentConfig&) {
  const auto checks = verify::default_battery();
  RunOutput out;
  out.experiment = "verify";
  Table t{"verify", split_csv(verify::CheckResult::csv_header()), {}};
  Table parts{"verify_parts", {"name", "part", "max_residual"}, {}};
  for (const auto& c : checks) {
    t.add(split_csv(c.csv_row()));
    for (const auto& [part, value] : c.parts) parts.add({c.name, part, num(value)});
    if (!c.pass) out.checks_failed = true;
    out.summary.push_back(std::string(c.pass ? "PASS " : "FAIL ") + c.name);
  }
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(parts));
  return out;
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::Demo1d: return run_demo1d(cfg);
    case Experiment::Demo2d: return run_demo2d(cfg);
    case Experiment::Sweep: return run_sweep(cfg);
    case Experiment::Ma: return run_ma(cfg);
    case Experiment::Moments: return run_moments(cfg);
    case Experiment::Scorematch: return run_scorematch(cfg);
    case Experiment::Verify: return run_verify(cfg);
  }
  throw ConfigError("unknown experiment");
}

}  // namespace denoise_lab::tools
