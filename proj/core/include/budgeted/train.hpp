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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "budgeted/data.hpp"
#include "budgeted/network.hpp"
#include "budgeted/optim.hpp"
#include "budgeted/schedules.hpp"

namespace budgeted {

struct IterationPoint {
  std::int64_t iter = 0;
  double beta = 0.0;
  /// Effective rate base_lr * beta.
  double lr = 0.0;
  /// Minibatch loss before the update.
  double train_loss = 0.0;

  friend bool operator==(const IterationPoint&, const IterationPoint&) = default;
};

struct EvalPoint {
  /// Epochs completed, fractional when the budget ends mid-epoch.
  double epoch = 0.0;
  /// Iterations completed at evaluation time.
  std::int64_t iteration = 0;
  double val_acc = 0.0;
  double full_grad_norm = 0.0;
  double weight_norm = 0.0;
  /// Median AMSGrad equivalent ratio against the momentum-SGD default base
  /// rate; NaN for momentum-SGD runs.
  double equivalent_lr = 0.0;

  friend bool operator==(const EvalPoint&, const EvalPoint&) = default;
};

struct RunMetadata {
  std::uint64_t seed = 0;
  ScheduleSpec schedule;
  OptimizerConfig optimizer;
  std::int64_t budget = 0;
  std::size_t batch_size = 0;
  std::int64_t iters_per_epoch = 0;
  std::int64_t eval_every = 0;
  std::uint64_t dataset_fingerprint = 0;
  std::size_t train_size = 0;
  std::string model;
};

struct RunRecord {
  RunMetadata meta;
  std::vector<IterationPoint> iterations;
  std::vector<EvalPoint> evals;
  bool diverged = false;
  std::string divergence_reason;
  std::vector<double> final_weights;

  /// Index of the evaluation with the highest validation accuracy; ties go
  /// to the earliest. Empty when nothing was evaluated.
  std::optional<std::size_t> best_eval() const;
  /// Best validation accuracy up to the end of the budget (0 if none).
  double best_val_acc() const;
  /// Training progress of an evaluation, iteration / budget.
  double progress_of(const EvalPoint& eval) const;
};

struct TrainOptions {
  /// Budget T in optimizer iterations.
  std::int64_t budget_iters = 1;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  /// Evaluation cadence in iterations; 0 means once per epoch. The final
  /// iteration is always evaluated.
  std::int64_t eval_every = 0;
  /// Loss above this (or non-finite) flags the run as diverged.
  double divergence_threshold = 1e6;
  /// Momentum-SGD base rate that AMSGrad equivalent ratios are measured against.
  double sgd_reference_lr = 0.1;
};

/// ceil(n / batch).
std::int64_t iterations_per_epoch(std::size_t n, std::size_t batch_size);

/// Converts a fraction of a full budget to iterations: nearest whole
/// iteration, at least 1.
std::int64_t budget_from_fraction(double fraction, std::int64_t full_budget_iters);

/// Runs exactly `options.budget_iters` optimizer iterations over seeded,
/// per-epoch shuffled minibatches of `data.train`. A diverged run stops
/// early with `diverged` set.
RunRecord train_budgeted(const Objective& objective, const Dataset& data,
                         std::vector<double> initial_weights, const ScheduleSpec& schedule,
                         const OptimizerConfig& optimizer, const TrainOptions& options);

/// Convenience overload for a classifier: initial weights from the seed.
RunRecord train_budgeted(const Network& network, const Dataset& data,
                         const ScheduleSpec& schedule, const OptimizerConfig& optimizer,
                         const TrainOptions& options);

}  // namespace budgeted
