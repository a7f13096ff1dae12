#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "mvrl/eval/density.hpp"
#include "mvrl/eval/probes.hpp"
#include "mvrl/nn/mlp.hpp"
#include "mvrl/report/figures.hpp"
#include "mvrl/rng.hpp"
#include "mvrl/tensor.hpp"

namespace {

using mvrl::Tensor2;

Tensor2 random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  mvrl::Rng rng = mvrl::make_rng(seed, 1);
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor2 t(rows, cols);
  for (double& v : t.data()) v = n(rng);
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  const Tensor2 a = random_tensor(100, n, 1), b = random_tensor(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mvrl::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * 100 * std::int64_t(n * n));
}
BENCHMARK(BM_Matmul)->Arg(256)->Arg(1024);

mvrl::nn::MlpSpec encoder_spec(std::size_t width) { return {{784, width, width, width, width, 2}}; }

void BM_MlpForward(benchmark::State& state) {
  const auto spec = encoder_spec(std::size_t(state.range(0)));
  mvrl::Rng rng(3);
  const auto params = mvrl::nn::init_params(spec, rng);
  const Tensor2 x = random_tensor(100, 784, 4);
  for (auto _ : state) benchmark::DoNotOptimize(mvrl::nn::mlp_forward(spec, params, x));
}
BENCHMARK(BM_MlpForward)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto spec = encoder_spec(std::size_t(state.range(0)));
  mvrl::Rng rng(3);
  const auto params = mvrl::nn::init_params(spec, rng);
  const Tensor2 x = random_tensor(100, 784, 4);
  const Tensor2 g = random_tensor(100, 2, 5);
  for (auto _ : state) {
    mvrl::nn::ForwardCache cache;
    mvrl::nn::mlp_forward(spec, params, x, cache);
    benchmark::DoNotOptimize(mvrl::nn::mlp_backward(spec, params, cache, g));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_KdeGrid(benchmark::State& state) {
  const Tensor2 points = random_tensor(std::size_t(state.range(0)), 2, 6);
  const Tensor2 grid = mvrl::eval::grid_centers(-4.0, 4.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(mvrl::eval::kde_log_density(points, grid));
}
BENCHMARK(BM_KdeGrid)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Mmd(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  const Tensor2 a = random_tensor(n, 2, 7), b = random_tensor(n, 2, 8);
  for (auto _ : state) benchmark::DoNotOptimize(mvrl::eval::mmd(a, b));
}
BENCHMARK(BM_Mmd)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_PlotEmbeddings(benchmark::State& state) {
  const std::size_t n = 10000;
  mvrl::eval::EmbeddingSet s;
  s.reps[mvrl::models::Latent::kZ] = random_tensor(n, 2, 9);
  for (std::size_t i = 0; i < n; ++i) {
    s.classes.push_back(int(i % 10));
    s.rot_x.push_back(0.1 * double(i % 7));
    s.rot_y.push_back(-0.1 * double(i % 5));
  }
  const auto dir = std::filesystem::temp_directory_path() / "mvrl_bench_embeddings";
  for (auto _ : state) mvrl::report::plot_embeddings(s, dir);
  std::filesystem::remove_all(dir);
}
BENCHMARK(BM_PlotEmbeddings)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
