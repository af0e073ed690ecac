#include "denoise_lab/tools/config.hpp"
#include "denoise_lab/tools/experiments.hpp"
#include "denoise_lab/tools/output.hpp"
#include "denoise_lab/tools/plot.hpp"
#include "denoise_lab/tools/signals.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace denoise_lab;
using namespace denoise_lab::tools;

namespace {

std::string config_error(const std::string& yaml, std::optional<Experiment> sub = std::nullopt) {
  try {
    parse_config(yaml, sub);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = parse_config("{}", Experiment::Sweep);
  EXPECT_EQ(cfg.experiment, Experiment::Sweep);
  EXPECT_EQ(cfg.signal.kind, "normal");
  EXPECT_EQ(cfg.etas, (std::vector<double>{0.02, 0.04, 0.08, 0.16}));
  EXPECT_EQ(cfg.n_train, 6400u);
  EXPECT_EQ(cfg.n_test, 1000u);
  EXPECT_EQ(cfg.bump.center.size(), 1);
  EXPECT_EQ(parse_config("{}", Experiment::Scorematch).signal.kind, "gauss");
}

TEST(Config, ParsesFullFile) {
  const auto cfg = parse_config(R"(
experiment: ma
signal:
  kind: mixture
  dim: 1
  components:
    - {weight: 0.4, mean: [-1.0], cov: [[0.8]]}
    - {weight: 0.6, mean: [1.2], cov: [[1.0]]}
noise: uniform
etas: [0.01, 0.02, 0.04, 0.08]
ma_points: 129
seed: 12
train: {lr: 0.002, epochs: 3}
)");
  EXPECT_EQ(cfg.experiment, Experiment::Ma);
  ASSERT_EQ(cfg.signal.components.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.signal.components[1].mean(0), 1.2);
  EXPECT_EQ(cfg.noise, "uniform");
  EXPECT_EQ(cfg.ma_points, 129u);
  EXPECT_EQ(cfg.seed, 12u);
  EXPECT_EQ(cfg.train.seed, 12u);
  EXPECT_DOUBLE_EQ(cfg.train.lr, 0.002);
  EXPECT_EQ(cfg.train.epochs, 3);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(config_error("bogus: 1").find("'bogus'"), std::string::npos);
  EXPECT_NE(config_error("train: {momentum: 0.9}").find("'train.momentum'"), std::string::npos);
  EXPECT_NE(config_error("eta: -1", Experiment::Demo1d).find("'eta'"), std::string::npos);
  EXPECT_NE(config_error("eta: abc").find("'eta'"), std::string::npos);
  EXPECT_NE(config_error("n_test: 0").find("'n_test'"), std::string::npos);
  EXPECT_NE(config_error("noise: laplace").find("'noise'"), std::string::npos);
  EXPECT_NE(config_error("signal: cube").find("'signal.kind'"), std::string::npos);
  EXPECT_NE(config_error("signal: {kind: mixture, dim: 1}").find("'signal.components'"),
            std::string::npos);
  EXPECT_NE(config_error("etas: [0.1, 0.2]", Experiment::Ma).find("'etas'"), std::string::npos);
  EXPECT_NE(config_error("etas: []", Experiment::Sweep).find("'etas'"), std::string::npos);
  EXPECT_NE(config_error("second_moment: exact").find("'second_moment'"), std::string::npos);
  EXPECT_NE(config_error("train: {lr: 0}").find("'train'"), std::string::npos);
  EXPECT_NE(config_error("experiment: sweep", Experiment::Ma).find("'experiment'"),
            std::string::npos);
  EXPECT_NE(config_error("signal: {kind: normal, dim: 2}", Experiment::Demo1d).find("'signal.dim'"),
            std::string::npos);
  EXPECT_NE(config_error("bump: {center: [0, 0]}").find("'bump.center'"), std::string::npos);
  EXPECT_FALSE(config_error("[1, 2").empty());
  EXPECT_THROW(load_config("/nonexistent/denoise.yaml"), ConfigError);
}

TEST(Config, OverridesWin) {
  auto cfg = parse_config("eta: 0.3\nseed: 4\n", Experiment::Sweep);
  Overrides o;
  o.eta = std::vector<double>{0.25};
  o.seed = 9;
  o.out_dir = "elsewhere";
  apply_overrides(cfg, o);
  EXPECT_DOUBLE_EQ(cfg.eta, 0.25);
  EXPECT_EQ(cfg.etas, std::vector<double>{0.25});
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.train.seed, 9u);
  EXPECT_EQ(cfg.out_dir, "elsewhere");
  Overrides bad;
  bad.eta = std::vector<double>{0.1};
  auto ma = parse_config("{}", Experiment::Ma);
  EXPECT_THROW(apply_overrides(ma, bad), ConfigError);
}

TEST(Config, CanonicalHashIsStable) {
  const auto a = parse_config("seed: 3\neta: 0.5\n", Experiment::Sweep);
  const auto b = parse_config("eta: 0.5\nseed: 3\n", Experiment::Sweep);
  const auto c = parse_config("eta: 0.5\nseed: 4\n", Experiment::Sweep);
  EXPECT_EQ(canonical(a), canonical(b));
  EXPECT_EQ(fnv1a(canonical(a)), fnv1a(canonical(b)));
  EXPECT_NE(fnv1a(canonical(a)), fnv1a(canonical(c)));
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Signals, TorusRadius) {
  const Signal s = make_signal({"torus", 2, {}});
  EXPECT_FALSE(s.mixture.has_value());
  EXPECT_EQ(s.dim, 2);
  Rng rng(5);
  const SampleMatrix x = s.sample(20000, rng);
  EXPECT_NEAR(x.rowwise().norm().mean(), 3.0, 0.1);
}

TEST(Signals, SquareSupportAndFixtures) {
  const Signal sq = make_signal({"square", 2, {}});
  EXPECT_FALSE(sq.mixture.has_value());
  Rng rng(6);
  const SampleMatrix x = sq.sample(5000, rng);
  EXPECT_LE(x.cwiseAbs().maxCoeff(), 2.0);
  const auto g = correlated_gaussian();
  EXPECT_NEAR(g.component(0).covariance.determinant(), 0.2, 1e-14);
  EXPECT_EQ(two_gaussians().size(), 2u);
  EXPECT_THROW(make_signal({"mixture", 1, {{1.0, Vector::Zero(2), Matrix::Identity(2, 2)}}}),
               ConfigError);
}

TEST(Signals, AddNoiseScale) {
  Rng rng(7);
  const SampleMatrix x = SampleMatrix::Zero(200000, 1);
  const SampleMatrix y = add_noise(x, models::NoiseModel::gaussian(1), 0.5, rng);
  EXPECT_NEAR(y.col(0).squaredNorm() / 200000.0, 1.0, 0.01);
}

TEST(ClosedForm, StandardNormalPushForwardErrors) {
  const auto p = models::GaussianMixture::standard_normal(1);
  const double eta = 0.5;
  const Matrix r = p.second_moment();
  auto err = [&](DenoiserKind k) {
    return metrics::relative_second_moment_error(gaussian_pushforward_second_moment(p, k, eta), r);
  };
  EXPECT_NEAR(err(DenoiserKind::Identity), 1.0, 1e-14);
  EXPECT_NEAR(err(DenoiserKind::Bayes), 0.5, 1e-14);
  EXPECT_NEAR(err(DenoiserKind::FirstOrder), 0.125, 1e-14);
  EXPECT_NEAR(err(DenoiserKind::SecondOrder), std::abs(2.0 * 0.71875 * 0.71875 - 1.0), 1e-14);
  EXPECT_NEAR(err(DenoiserKind::SecondOrder), 0.0332, 5e-5);
}

TEST(ClosedForm, MatchesPushForwardOfAnalyticDenoisers) {
  // Independent path: M estimated from the denoiser Jacobian, then μμᵀ + M S Mᵀ.
  const auto p = correlated_gaussian();
  const double eta = 0.3;
  const auto q = models::noisy_mixture(p, eta);
  const auto o = score::mixture_oracle(q);
  const Vector mu = p.mean();
  const Matrix s = q.component(0).covariance;
  for (auto k : {DenoiserKind::Bayes, DenoiserKind::FirstOrder, DenoiserKind::SecondOrder}) {
    const denoise::Denoiser den(k, eta, o);
    const Matrix m = den.jacobian(mu);
    EXPECT_LT((den.apply(mu) - mu).norm(), 1e-9);
    const Matrix expected = mu * mu.transpose() + m * s * m.transpose();
    EXPECT_LT((gaussian_pushforward_second_moment(p, k, eta) - expected).cwiseAbs().maxCoeff(), 1e-6)
        << denoise::to_string(k);
  }
}

TEST(Slopes, FitsPerDenoiser) {
  std::vector<RateRow> rows;
  for (double eta : {0.0, 0.01, 0.02, 0.04, 0.08}) {
    rows.push_back({eta, DenoiserKind::FirstOrder, 5.0 * eta * eta, "ok"});
    rows.push_back({eta, DenoiserKind::Bayes, -0.3 * eta, "ok"});
  }
  rows.push_back({0.16, DenoiserKind::SecondOrder, std::nullopt, "violation"});
  const auto fits = fit_slopes(rows);
  for (const auto& f : fits) {
    if (f.kind == DenoiserKind::FirstOrder) EXPECT_NEAR(f.fit->slope, 2.0, 1e-12);
    if (f.kind == DenoiserKind::Bayes) EXPECT_NEAR(f.fit->slope, 1.0, 1e-12);
    if (f.kind == DenoiserKind::SecondOrder) EXPECT_FALSE(f.fit.has_value());
  }
}

TEST(Captions, KnownSignals) {
  const auto sq = caption_values("square");
  ASSERT_TRUE(sq.has_value());
  EXPECT_EQ(*sq, (std::vector<double>{0.237, 0.262, 0.081, 0.071}));
  EXPECT_FALSE(caption_values("normal").has_value());
}

TEST(Colors, PaperOrder) {
  const auto& d = compared_denoisers();
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(d[0].color, "#1f77b4");
  EXPECT_EQ(d[1].color, "#ff7f0e");
  EXPECT_EQ(d[2].color, "#2ca02c");
  EXPECT_EQ(d[3].color, "#d62728");
  EXPECT_EQ(d[2].label, "T1");
}

TEST(Svg, StructureAndEscaping) {
  Plot plot;
  plot.name = "p";
  plot.title = "errors <&> \"eta\"";
  plot.x_label = "eta";
  plot.y_label = "error";
  plot.log_x = true;
  plot.log_y = true;
  for (const auto& d : compared_denoisers()) {
    plot.series.push_back({d.label, d.color, {0.0, 0.01, 0.1, 1.0}, {1.0, 0.1, -1.0, 0.01}});
  }
  const std::string svg = render_svg(plot);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("width=\"800\" height=\"600\""), std::string::npos);
  EXPECT_NE(svg.find("viewBox=\"0 0 800 600\""), std::string::npos);
  EXPECT_NE(svg.find("errors &lt;&amp;&gt; &quot;eta&quot;"), std::string::npos);
  EXPECT_NE(svg.find(">eta</text>"), std::string::npos);
  EXPECT_NE(svg.find(">error</text>"), std::string::npos);
  for (const auto& d : compared_denoisers()) {
    EXPECT_NE(svg.find(">" + d.label + "</text>"), std::string::npos);
    EXPECT_NE(svg.find(d.color), std::string::npos);
  }
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
  const auto count = [&](const std::string& s) {
    std::size_t n = 0;
    for (auto pos = svg.find(s); pos != std::string::npos; pos = svg.find(s, pos + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count("<svg"), 1u);
  EXPECT_EQ(count("</svg>"), 1u);
  EXPECT_EQ(xml_escape("a'b"), "a&apos;b");
}

TEST(Output, TableCsvAndWidthCheck) {
  Table t{"x", {"a", "b"}, {}};
  t.add({"1", "2"});
  EXPECT_EQ(t.csv(), "a,b\n1,2\n");
  EXPECT_THROW(t.add({"1"}), std::logic_error);
}

TEST(Output, WritesCsvSvgAndManifest) {
  auto cfg = parse_config("{}", Experiment::Verify);
  cfg.out_dir = (std::filesystem::temp_directory_path() / "denoise_lab_output_test").string();
  std::filesystem::remove_all(cfg.out_dir);
  RunOutput run;
  run.experiment = "verify";
  run.tables.push_back({"verify", {"a"}, {{"1"}}});
  Plot p;
  p.name = "verify_plot";
  p.x_label = "x";
  p.y_label = "y";
  p.series.push_back({"Identity", "#1f77b4", {0.0, 1.0}, {0.0, 1.0}});
  run.plots.push_back(p);
  write_outputs(run, cfg);
  const std::filesystem::path dir(cfg.out_dir);
  EXPECT_EQ(read_file(dir / "verify.csv"), "a\n1\n");
  EXPECT_TRUE(std::filesystem::exists(dir / "verify_plot.svg"));
  const std::string m = read_file(dir / "manifest.txt");
  EXPECT_TRUE(std::regex_search(m, std::regex("config_hash fnv1a64:[0-9a-f]{16}")));
  EXPECT_NE(m.find(version_string()), std::string::npos);
  EXPECT_NE(m.find("eigen"), std::string::npos);
  EXPECT_NE(m.find(canonical(cfg)), std::string::npos);
  std::filesystem::remove_all(dir);
}
