// Serial reference kernels against their OpenMP counterparts.
// locfft_bench --benchmark_filter=Dataset   etc.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>
#include <random>

#include "locfft/nmf.hpp"
#include "locfft/window_fft.hpp"

using namespace locfft;

namespace {

GrayImage texture(int size) {
  GrayImage img(size, size);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 5.0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double t = x < size / 2 ? x : y;
      img.at(x, y) = 100.0 * std::sin(2.0 * M_PI * t / 8.0) + noise(rng);
    }
  }
  return img;
}

void BM_DatasetSerial(benchmark::State& state) {
  const GrayImage img = texture(static_cast<int>(state.range(0)));
  const WindowGrid g = plan_grid(img.width, img.height, 128, 64, 64);
  for (auto _ : state) benchmark::DoNotOptimize(build_dataset_serial(img, g).X.data());
  state.counters["windows"] = g.n_windows();
}

void BM_DatasetParallel(benchmark::State& state) {
  const GrayImage img = texture(static_cast<int>(state.range(0)));
  const WindowGrid g = plan_grid(img.width, img.height, 128, 64, 64);
  for (auto _ : state) benchmark::DoNotOptimize(build_dataset(img, g).X.data());
  state.counters["windows"] = g.n_windows();
  state.counters["threads"] = omp_get_max_threads();
}

RowMatrix nmf_input() {
  const GrayImage img = texture(1024);
  return build_dataset(img, plan_grid(1024, 1024, 128, 64, 64)).X;
}

NmfOptions iterations(int n) {
  NmfOptions o;
  o.max_iter = n;
  o.tol = 0.0;
  return o;
}

void BM_NmfReference(benchmark::State& state) {
  const RowMatrix X = nmf_input();
  const int k = static_cast<int>(state.range(0));
  const NmfInit init = nndsvd_init(X, k);
  for (auto _ : state) benchmark::DoNotOptimize(nmf_iterate_reference(X, init, iterations(10)).W.data());
}

void BM_NmfParallel(benchmark::State& state) {
  const RowMatrix X = nmf_input();
  const int k = static_cast<int>(state.range(0));
  const NmfInit init = nndsvd_init(X, k);
  for (auto _ : state) benchmark::DoNotOptimize(nmf_iterate(X, init, iterations(10)).W.data());
  state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_DatasetSerial)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DatasetParallel)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NmfReference)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NmfParallel)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
