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
#include <span>
#include <string>
#include <vector>

#include "budgeted/data.hpp"
#include "budgeted/network.hpp"
#include "budgeted/optim.hpp"
#include "budgeted/schedules.hpp"

namespace budgeted {

struct ArchitectureFamily {
  std::vector<Architecture> members;
  std::uint64_t seed = 0;
};

/// `count` distinct random MLPs: depth in {1, 2, 3}, widths in [8, 64],
/// an identity skip around each hidden layer after the first with
/// probability 1/2 (the layer then keeps the previous width).
ArchitectureFamily gen_architectures(std::size_t count, std::uint64_t seed, int input_dim,
                                     int num_classes);

/// Tie-corrected Kendall tau-b, computed with Knight's O(n log n) merge
/// count. Empty when either list is constant (no untied pairs).
std::optional<double> kendall_tau(std::span<const double> a, std::span<const double> b);

struct NamedSchedule {
  std::string name;
  ScheduleSpec spec;
  /// Used when `spec` is budget-unaware; its time unit is epochs.
  Conversion conversion = Conversion::kBac;
};

struct RankTask {
  const Dataset* data = nullptr;
  OptimizerConfig optimizer = OptimizerConfig::sgd_defaults();
  std::size_t batch_size = 128;
  std::int64_t full_budget_epochs = 100;
  /// Schedule of the full-budget reference runs.
  ScheduleSpec reference = default_spec(ScheduleKind::kLinear);
  unsigned jobs = 1;
};

struct RankCell {
  std::string schedule;
  double budget = 0.0;
  /// Empty when degenerate (all predictions tied, or fewer than two
  /// trainable architectures).
  std::optional<double> tau;
  /// Median-over-seeds best accuracy per architecture; NaN when excluded.
  std::vector<double> accuracy;
};

struct RankTable {
  std::vector<std::string> schedules;
  std::vector<double> budgets;
  /// schedules-major: cells[s * budgets.size() + b].
  std::vector<RankCell> cells;
  /// Full-budget reference accuracy per architecture; NaN when excluded.
  std::vector<double> full_accuracy;
  /// Architectures with at least one diverged run, excluded from all cells.
  std::vector<std::size_t> excluded;

  const RankCell& cell(std::size_t schedule, std::size_t budget) const {
    return cells[schedule * budgets.size() + budget];
  }
};

/// Trains every architecture under the full-budget reference and every
/// (schedule, budget fraction) cell, takes the median over `seeds` of each
/// run's best validation accuracy, and ranks budgeted against full.
RankTable rank_experiment(const ArchitectureFamily& family, std::span<const NamedSchedule> schedules,
                          std::span<const double> budgets, const RankTask& task,
                          std::span<const std::uint64_t> seeds);

struct AccuracyCell {
  std::string schedule;
  double budget = 0.0;
  /// Mean budgeted accuracy across included architectures.
  double raw_mean = 0.0;
  /// Mean of budgeted / full-budget accuracy per architecture.
  double normalized_mean = 0.0;
};

std::vector<AccuracyCell> budgeted_accuracy_table(const RankTable& table);
std::vector<AccuracyCell> budgeted_accuracy_table(const ArchitectureFamily& family,
                                                  std::span<const NamedSchedule> schedules,
                                                  std::span<const double> budgets,
                                                  const RankTask& task,
                                                  std::span<const std::uint64_t> seeds);

}  // namespace budgeted
