#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <vector>

#include "birdcall/dsp.hpp"
#include "birdcall/features.hpp"
#include "birdcall/network.hpp"
#include "birdcall/rng.hpp"

using namespace birdcall;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = 0.3 * rng.normal();
  return x;
}

std::vector<Sample> samples(const ArchConfig& a, std::size_t n) {
  std::vector<Sample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].label = static_cast<int>(i % a.class_count);
    out[i].image_count = a.feature_count;
    out[i].rows = a.image_rows;
    out[i].cols = a.image_cols;
    out[i].pixels = noise(a.feature_count * a.image_rows * a.image_cols, i + 1);
  }
  return out;
}

}  // namespace

static void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n, 1);
  std::vector<std::complex<double>> buf(n);
  for (auto _ : state) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
    fft_in_place(buf);
    benchmark::DoNotOptimize(buf.data());
  }
}
BENCHMARK(BM_Fft)->Arg(64)->Arg(1024)->Arg(4096);

static void BM_FrameFeatures(benchmark::State& state) {
  const int fs = 44100;
  const auto bank = build_mel_filterbank(fs, 4096);
  const auto prev = noise(2205, 2);
  const auto cur = noise(2205, 3);
  const auto sp = fft_magnitude(prev, true, fs);
  for (auto _ : state) {
    const auto sc = fft_magnitude(cur, true, fs);
    benchmark::DoNotOptimize(frame_features(cur, sc, &sp, bank, {}));
  }
}
BENCHMARK(BM_FrameFeatures);

static void BM_ExtractOneSecond(benchmark::State& state) {
  const MonoSignal s{noise(44100, 4), 44100};
  const auto set = FeatureSet::named("Set3");
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(s, FrameConfig{}, FeatureConfig{}, set));
}
BENCHMARK(BM_ExtractOneSecond)->Unit(benchmark::kMillisecond);

static void BM_ForwardBackward(benchmark::State& state) {
  ArchConfig a;
  a.class_count = 5;
  a.feature_count = 25;
  const auto params = init_params(a, 1);
  const auto data = samples(a, static_cast<std::size_t>(state.range(0)));
  std::vector<const Sample*> batch;
  std::vector<int> labels;
  for (const auto& s : data) {
    batch.push_back(&s);
    labels.push_back(s.label);
  }
  auto grads = ModelParams::zeros(a);
  for (auto _ : state) {
    const auto cache = forward(params, a, batch);
    backward(params, a, cache, labels, 1.0, grads);
    benchmark::DoNotOptimize(grads.tensors.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
