// Copyright 2026 The qmp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial vs OpenMP timings for the per-sample kernels.
// Run: ./build/bench_kernels --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>

#include "qmp/kinematics.hpp"
#include "qmp/measures.hpp"
#include "qmp/unitary_recon.hpp"

namespace {

using qmp::Execution;

Execution mode(const benchmark::State& s) { return s.range(0) ? Execution::parallel : Execution::serial; }

const qmp::Trajectory<4>& damped() {
  static const auto traj = qmp::DampedExchange(2.0, 0.2).joint_trajectory(qmp::Grid{0.0, 1e-3, 10000});
  return traj;
}

void BM_ScenarioSampling(benchmark::State& s) {
  const qmp::DampedExchange ex(2.0, 0.2);
  for (auto _ : s) benchmark::DoNotOptimize(ex.joint_trajectory(qmp::Grid{0.0, 1e-3, 10000}, mode(s)));
}

void BM_UnitarityTest(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(qmp::unitarity_test(damped(), qmp::kDefaultTol, mode(s)));
}

void BM_MeasureSeries(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(qmp::measure_series(damped(), qmp::kDefaultTol, mode(s)));
}

void BM_EigenframeTrack(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(qmp::track_eigenframes(damped(), {}, mode(s)));
}

}  // namespace

BENCHMARK(BM_ScenarioSampling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UnitarityTest)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeasureSeries)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EigenframeTrack)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
