#include <benchmark/benchmark.h>

#include "dtwreg/eval.hpp"
#include "dtwreg/synth.hpp"

namespace {

const dtwreg::Dataset& default_data() {
  static const dtwreg::Dataset ds = dtwreg::generate(dtwreg::SynthConfig{});
  return ds;
}

}  // namespace

static void BM_Generate(benchmark::State& state) {
  dtwreg::SynthConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(dtwreg::generate(cfg));
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

// One model, single channel, 10-fold CV on the default synthetic set.
static void BM_CrossValidate(benchmark::State& state) {
  const auto& ds = default_data();
  const auto model = static_cast<dtwreg::ModelKind>(state.range(0));
  dtwreg::ModelConfig cfg;
  cfg.channels = {ds.channel_order().front()};
  const auto plan = dtwreg::kfold_plan(ds.size(), dtwreg::kDefaultFolds, dtwreg::kDefaultSeed);
  for (auto _ : state) benchmark::DoNotOptimize(dtwreg::cross_validate(ds, model, cfg, plan));
  state.SetLabel(dtwreg::model_name(model));
}
BENCHMARK(BM_CrossValidate)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

// The full comparison: channel ranking plus all models on 1..11 channels.
static void BM_FullComparison(benchmark::State& state) {
  const auto& ds = default_data();
  dtwreg::ModelConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dtwreg::run_comparison(ds, cfg, ds.channel_order().size(), dtwreg::kDefaultFolds, dtwreg::kDefaultSeed));
  }
}
BENCHMARK(BM_FullComparison)->Unit(benchmark::kSecond)->Iterations(1);
BENCHMARK_MAIN();
