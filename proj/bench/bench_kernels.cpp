// Serial reference against the fast and OpenMP kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "qpb/convolution.hpp"
#include "qpb/picard.hpp"

using namespace qpb;

namespace {

LatticeField random_field(const BallPtr& ball, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  LatticeField f(ball);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {g(rng), g(rng)};
  return f;
}

void BM_Convolve2Reference(benchmark::State& st) {
  const auto ball = Ball::make(2, static_cast<int>(st.range(0)));
  const auto a = random_field(ball, 1), b = random_field(ball, 2);
  for (auto _ : st) benchmark::DoNotOptimize(reference::convolve2(a, b));
  st.SetLabel(std::to_string(ball->size()) + " modes");
}

void BM_Convolve2(benchmark::State& st, Execution exec) {
  const auto ball = Ball::make(2, static_cast<int>(st.range(0)));
  const auto a = random_field(ball, 1), b = random_field(ball, 2);
  for (auto _ : st) benchmark::DoNotOptimize(convolve2(a, b, exec));
  st.SetLabel(std::to_string(ball->size()) + " modes");
}

void BM_ConvolveP(benchmark::State& st, Execution exec) {
  const auto ball = Ball::make(2, static_cast<int>(st.range(0)));
  const auto a = random_field(ball, 3);
  const PowerConvolver conv(ball, 3);
  for (auto _ : st) benchmark::DoNotOptimize(conv.apply(a, exec));
}

void BM_PicardStep(benchmark::State& st, Execution exec) {
  const auto ball = Ball::make(2, static_cast<int>(st.range(0)));
  const FrequencyVector w{1.0, 1.4142135623730951};
  const auto spec = Exponential{1.0, 1.0};
  const TimeGrid grid(constants(spec, 2, 2).proven_horizon(), 64);
  const PicardEngine eng(boundary_data(ball, spec), grid, w, {.execution = exec});
  const Snapshot start = eng.linear();
  for (auto _ : st) benchmark::DoNotOptimize(eng.step(start));
}

}  // namespace

BENCHMARK(BM_Convolve2Reference)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Convolve2, serial, Execution::Serial)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Convolve2, parallel, Execution::Parallel)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_ConvolveP, serial, Execution::Serial)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_ConvolveP, parallel, Execution::Parallel)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_PicardStep, serial, Execution::Serial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PicardStep, parallel, Execution::Parallel)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
