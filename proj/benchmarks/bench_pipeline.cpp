#include <cmath>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "epf/denoise.hpp"
#include "epf/emd.hpp"
#include "epf/neural/recurrent.hpp"
#include "epf/rng.hpp"

namespace {

std::vector<double> noisy_tones(std::size_t n, std::uint64_t seed) {
  epf::Rng rng(seed);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double u = static_cast<double>(t) / static_cast<double>(n);
    x[t] = std::sin(2 * std::numbers::pi * 32 * u) + 0.5 * std::sin(2 * std::numbers::pi * 4 * u) + 0.3 * rng.normal();
  }
  return x;
}

void BM_SiftImf(benchmark::State& state) {
  const auto x = noisy_tones(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(epf::sift_imf(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SiftImf)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_EmdDecompose(benchmark::State& state) {
  const auto x = noisy_tones(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(epf::emd_decompose(x, epf::default_max_imfs(x.size())));
}
BENCHMARK(BM_EmdDecompose)->Arg(1024)->Arg(4096);

void BM_Ceemdan(benchmark::State& state) {
  const auto x = noisy_tones(1024, 3);
  epf::CeemdanConfig cfg;
  cfg.ensemble_size = static_cast<std::size_t>(state.range(0));
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(epf::ceemdan_decompose(x, cfg));
}
BENCHMARK(BM_Ceemdan)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_PermutationEntropy(benchmark::State& state) {
  const auto x = noisy_tones(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(epf::permutation_entropy(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PermutationEntropy)->Arg(1024)->Arg(28032);

void BM_RecurrentForward(benchmark::State& state) {
  const auto kind = state.range(0) == 0 ? epf::nn::CellKind::Gru : epf::nn::CellKind::Lstm;
  epf::Rng rng(5);
  const auto params = epf::nn::RecurrentCellParams::glorot(kind, 8, 32, rng);
  std::vector<Eigen::VectorXd> seq(8, Eigen::VectorXd::Constant(8, 0.5));
  const Eigen::VectorXd h0 = Eigen::VectorXd::Zero(32);
  for (auto _ : state) benchmark::DoNotOptimize(epf::nn::recurrent_forward(params, seq, h0));
  state.SetLabel(epf::nn::to_string(kind));
}
BENCHMARK(BM_RecurrentForward)->Arg(0)->Arg(1);

}  // namespace
BENCHMARK_MAIN();
