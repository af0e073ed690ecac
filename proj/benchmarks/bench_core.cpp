#include "denoise_lab/metrics.hpp"
#include "denoise_lab/models.hpp"
#include "denoise_lab/score.hpp"
#include "denoise_lab/scorematch.hpp"

#include <benchmark/benchmark.h>

using namespace denoise_lab;

namespace {

models::GaussianMixture random_mixture(int dim, int k, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<models::GaussianComponent> comps;
  for (int i = 0; i < k; ++i) {
    Vector mu(dim);
    for (int j = 0; j < dim; ++j) mu(j) = 2.0 * n(rng);
    comps.push_back({1.0 / k, mu, Matrix::Identity(dim, dim) * (0.5 + 0.1 * i)});
  }
  return models::GaussianMixture(comps);
}

}  // namespace

static void BM_MixtureScore(benchmark::State& state) {
  Rng rng(1);
  const int dim = static_cast<int>(state.range(0));
  const auto q = random_mixture(dim, static_cast<int>(state.range(1)), rng);
  const Vector y = Vector::Constant(dim, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(score::mixture_score(q, y));
}
BENCHMARK(BM_MixtureScore)->Args({1, 2})->Args({2, 8})->Args({8, 32});

static void BM_MixtureScoreJacobian(benchmark::State& state) {
  Rng rng(2);
  const int dim = static_cast<int>(state.range(0));
  const auto q = random_mixture(dim, 8, rng);
  const Vector y = Vector::Constant(dim, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(score::mixture_score_jacobian(q, y));
}
BENCHMARK(BM_MixtureScoreJacobian)->Arg(2)->Arg(8);

static void BM_Sinkhorn(benchmark::State& state) {
  Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = models::GaussianMixture::standard_normal(2);
  const SampleMatrix a = models::mixture_sample(p, n, rng);
  const SampleMatrix b = models::mixture_sample(p, n, rng).array() + 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(metrics::sinkhorn_w2(a, b));
}
BENCHMARK(BM_Sinkhorn)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_ParamGrad(benchmark::State& state) {
  Rng rng(4);
  const auto net = scorematch::MlpScore::random(2, rng, static_cast<int>(state.range(0)), 3);
  const SampleMatrix batch =
      models::mixture_sample(models::GaussianMixture::standard_normal(2), 128, rng);
  for (auto _ : state) benchmark::DoNotOptimize(scorematch::param_grad(net, batch));
}
BENCHMARK(BM_ParamGrad)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
