/*
 * Copyright 2026 The hybridoc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "hybridoc/hdp_kernels.hpp"
#include "hybridoc/oracle.hpp"
#include "hybridoc/presets.hpp"

#include <benchmark/benchmark.h>

#include <memory>

using namespace hybridoc;

namespace {

/// One backward slice on the Example 2 oscillator stage, with the double
/// integrator stage as the switching target.
struct SlFixture {
  Preset p = example2();
  std::unique_ptr<ValueGrid> next;
  std::unique_ptr<ValueGrid> grid;
  StageContext ctx;

  explicit SlFixture(double dx) {
    next = std::make_unique<ValueGrid>(Location{1}, 0, p.value_boxes[1], dx, 0.0, 0.1, 0.05, 1);
    grid = std::make_unique<ValueGrid>(Location{0}, 1, p.value_boxes[0], dx, 0.0, 0.1, 0.05, 1);
    for (std::size_t n = 0; n < next->values.size(); ++n) next->values[n] = 1e-3 * static_cast<double>(n % 97);
    for (std::size_t n = 0; n < grid->values.size(); ++n) grid->values[n] = 1e-3 * static_cast<double>(n % 89);
    StageExit exit;
    exit.kind = SwitchKind::autonomous;
    exit.event = p.problem.sequence[0];
    exit.to = Location{1};
    exit.next = next.get();
    exit.manifold = p.problem.system.manifold_for(Location{0}, exit.event);
    ctx = make_stage_context(p.problem.system, p.problem.cost, Location{0}, exit, 41, true, 1e-5);
  }
};

void BM_SlStepSerial(benchmark::State& state) {
  SlFixture fx(1.0 / static_cast<double>(state.range(0)));
  const int k = fx.grid->slices - 2;
  for (auto _ : state) {
    sl_step_serial(fx.ctx, *fx.grid, k);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(fx.grid->node_count()));
}

void BM_SlStepParallel(benchmark::State& state) {
  SlFixture fx(1.0 / static_cast<double>(state.range(0)));
  const int k = fx.grid->slices - 2;
  for (auto _ : state) {
    sl_step_parallel(fx.ctx, *fx.grid, k);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(fx.grid->node_count()));
}

void BM_LatticeOracle(benchmark::State& state) {
  OracleSpec spec;
  spec.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(example1_lattice_oracle(1.0, 0.0, 1.0, spec).best.cost);
}

void BM_ClosedFormOracle(benchmark::State& state) {
  OracleSpec spec;
  spec.pieces = 6;
  spec.levels = 7;
  spec.u_min = -1.5;
  spec.u_max = 1.5;
  spec.parallel = state.range(0) != 0;
  const Vec x0 = example2().problem.x0;
  for (auto _ : state) benchmark::DoNotOptimize(example2_closed_form_oracle(x0, 1.0, 0.0, 4.0, spec).best.cost);
}

}  // namespace

BENCHMARK(BM_SlStepSerial)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SlStepParallel)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LatticeOracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClosedFormOracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
