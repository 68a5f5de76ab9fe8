// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "emm/engine.hpp"

namespace {

emm::RunConfig bench_config() {
  emm::RunConfig c;
  c.workload.task_count = 100;
  c.workload.battery = 200;
  return c;
}

std::vector<std::uint64_t> seeds(std::int64_t n) {
  std::vector<std::uint64_t> s;
  for (std::int64_t i = 1; i <= n; ++i) s.push_back(static_cast<std::uint64_t>(i));
  return s;
}

void BM_Replicate(benchmark::State& state) {
  const auto c = bench_config();
  const auto s = seeds(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(emm::replicate(c, s));
}

void BM_ReplicateSerial(benchmark::State& state) {
  const auto c = bench_config();
  const auto s = seeds(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(emm::replicate_serial(c, s));
}

// Larger frames make the branch and bound dominate.
emm::RunConfig frame_config(std::int64_t j) {
  auto c = bench_config();
  c.control.frame_length = static_cast<int>(j);
  c.workload.task_count = static_cast<int>(j) * 20;
  return c;
}

void BM_PlanFrames(benchmark::State& state) {
  const auto c = frame_config(state.range(0));
  const auto real = emm::generate_realization(c);
  for (auto _ : state) benchmark::DoNotOptimize(emm::plan_frames(c, real));
}

void BM_PlanFramesSerial(benchmark::State& state) {
  const auto c = frame_config(state.range(0));
  const auto real = emm::generate_realization(c);
  for (auto _ : state) benchmark::DoNotOptimize(emm::plan_frames_serial(c, real));
}

}  // namespace

BENCHMARK(BM_Replicate)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ReplicateSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PlanFrames)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PlanFramesSerial)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
