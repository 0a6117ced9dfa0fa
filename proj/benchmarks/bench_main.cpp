// Copyright 2026 The Budgeted Training Authors
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
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "budgeted/network.hpp"
#include "budgeted/optim.hpp"
#include "budgeted/ranking.hpp"
#include "budgeted/schedules.hpp"

namespace budgeted {
namespace {

void BM_EvalSchedule(benchmark::State& state) {
  const auto kind = static_cast<ScheduleKind>(state.range(0));
  ScheduleSpec spec = default_spec(kind);
  if (kind == ScheduleKind::kStep) spec.drops = {0.5, 0.75};
  std::int64_t t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_schedule(spec, BudgetClock(t, 100000)));
    t = (t + 1) % 100000;
  }
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_EvalSchedule)
    ->Arg(static_cast<int>(ScheduleKind::kStep))
    ->Arg(static_cast<int>(ScheduleKind::kCosine))
    ->Arg(static_cast<int>(ScheduleKind::kLinear))
    ->Arg(static_cast<int>(ScheduleKind::kSgdrAware));

void BM_OptimizerStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const bool ams = state.range(1) != 0;
  const auto cfg = ams ? OptimizerConfig::amsgrad_defaults() : OptimizerConfig::sgd_defaults();
  auto opt = OptimizerState::init(std::vector<double>(n, 0.1), cfg.kind);
  std::vector<double> grad(n, 0.01);
  for (auto _ : state) {
    optimizer_step(opt, grad, 0.5, cfg);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_OptimizerStep)->Args({17284, 0})->Args({17284, 1});

void BM_ForwardBackward(benchmark::State& state) {
  Architecture arch;
  arch.input_dim = 4;
  arch.num_classes = 4;
  const int width = static_cast<int>(state.range(0));
  arch.hidden = {width, width};
  const Network net(arch);
  const auto w = net.init_weights(1);
  Examples batch;
  const int n = static_cast<int>(state.range(1));
  batch.features = Eigen::MatrixXd::Random(4, n);
  for (int j = 0; j < n; ++j) batch.labels.push_back(j % 4);
  std::vector<double> grad(net.num_params());
  for (auto _ : state) benchmark::DoNotOptimize(net.loss_and_gradient(w, batch, grad));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ForwardBackward)->Args({32, 64})->Args({128, 64})->Args({128, 1000});

void BM_KendallTau(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(3);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = static_cast<double>(gen() % 100);
    b[i] = static_cast<double>(gen() % 100);
  }
  for (auto _ : state) benchmark::DoNotOptimize(kendall_tau(a, b));
}
BENCHMARK(BM_KendallTau)->Arg(20)->Arg(1000)->Arg(100000);

}  // namespace
}  // namespace budgeted

BENCHMARK_MAIN();
