#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dtwreg/dtw.hpp"

namespace {

std::vector<double> noise_series(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> s(n);
  for (auto& v : s) v = nd(rng);
  return s;
}

}  // namespace

// args: series length, window
static void BM_DtwDistance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = static_cast<std::size_t>(state.range(1));
  const auto a = noise_series(n, 1), b = noise_series(n, 2);
  dtwreg::reset_dtw_cell_count();
  for (auto _ : state) benchmark::DoNotOptimize(dtwreg::dtw_distance(a, b, dtwreg::DtwParams{w}));
  state.counters["cells/call"] =
      static_cast<double>(dtwreg::dtw_cell_count()) / static_cast<double>(state.iterations());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DtwDistance)
    ->ArgsProduct({{57, 256, 1024}, {0, 1, 4, 16}})
    ->ArgNames({"n", "w"});

static void BM_DtwAlign(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise_series(n, 3), b = noise_series(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(dtwreg::dtw_align(a, b, dtwreg::DtwParams{4}));
}
BENCHMARK(BM_DtwAlign)->Arg(57)->Arg(1024);
