// Microbenchmarks for the hot paths: model inference, wavelet band split,
// filtering, and spline interpolation.
#include <benchmark/benchmark.h>

#include <vector>

#include "eegtok/eval.hpp"
#include "eegtok/wavelet.hpp"

using namespace eegtok;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t stream) {
  Rng rng(1234, stream);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.gaussian();
  return x;
}

void bm_model_forward(benchmark::State& state) {
  ModelConfig cfg;
  Model model(cfg, 0);
  const auto batch = static_cast<std::size_t>(state.range(0));
  Rng rng(9, 0);
  grad::Tensor x({batch, 19, 128});
  for (auto& v : x.v) v = rng.gaussian();
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x, false));
  state.SetItemsProcessed(static_cast<std::int64_t>(batch) * state.iterations());
}
BENCHMARK(bm_model_forward)->Arg(1)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

void bm_train_step(benchmark::State& state) {
  ModelConfig cfg;
  Model model(cfg, 0);
  Rng rng(10, 0);
  grad::Tensor x({16, 19, 128});
  for (auto& v : x.v) v = rng.gaussian();
  std::vector<int> labels(16);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
  grad::AdamState adam;
  auto params = model.params();
  for (auto _ : state) {
    auto ce = grad::softmax_cross_entropy(model.forward(x, true), labels);
    model.zero_grads();
    model.backward(ce.grad_logits);
    grad::adam_step(params, model.grads(), adam);
  }
  state.SetItemsProcessed(16 * state.iterations());
}
BENCHMARK(bm_train_step)->Unit(benchmark::kMillisecond);

void bm_band_split(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(extract_bands(x));
  state.SetItemsProcessed(state.range(0) * state.iterations());
}
BENCHMARK(bm_band_split)->Arg(256)->Arg(2048)->Arg(16384);

void bm_bandpass(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(bandpass(x, 500.0, {}));
  state.SetItemsProcessed(state.range(0) * state.iterations());
}
BENCHMARK(bm_bandpass)->Arg(2048)->Arg(16384);

void bm_resample(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(resample(x, 500.0, 128.0));
  state.SetItemsProcessed(state.range(0) * state.iterations());
}
BENCHMARK(bm_resample)->Arg(2048)->Arg(16384);

void bm_spline_apply(benchmark::State& state) {
  const auto& montage = standard_10_20();
  std::vector<Vec3> src(montage.positions.begin(), montage.positions.end() - 3);
  SplineInterpolator interp(src, montage.positions);
  const auto v = noise(src.size(), 4);
  for (auto _ : state) benchmark::DoNotOptimize(interp.apply(v));
}
BENCHMARK(bm_spline_apply);

void bm_preprocess_recording(benchmark::State& state) {
  SynthSpec spec;
  spec.n_subjects_per_class = 1;
  spec.duration_s = 16.0;
  const auto recs = synthesize_recordings(spec);
  for (auto _ : state)
    benchmark::DoNotOptimize(preprocess_recording(recs[0], standard_10_20(), Band::Alpha));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_preprocess_recording)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
