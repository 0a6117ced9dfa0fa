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
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "budgeted/data.hpp"
#include "budgeted/network.hpp"
#include "budgeted/optim.hpp"
#include "budgeted/schedules.hpp"

namespace budgeted {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message);

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct DatasetConfig {
  /// Synthetic generator; unused when `csv_path` is set.
  GeneratorSpec generator;
  /// CSV file in `label,f1,...` form, split with `generator.holdout`.
  std::filesystem::path csv_path;
  /// Generator (or split) seed. Empty: derived from the run seed.
  std::optional<std::uint64_t> seed;
};

struct ModelConfig {
  std::vector<int> hidden;
  Activation activation = Activation::kRelu;
  std::vector<bool> skip;
};

struct ScheduleConfig {
  /// Label used in sweep and rank outputs; defaults to the kind name.
  std::string name;
  ScheduleSpec spec;
  /// How a budget-unaware spec (time unit: epochs) is fitted to the budget.
  Conversion conversion = Conversion::kBac;
};

/// Exactly one of the two is set.
struct BudgetConfig {
  std::optional<double> fraction;
  std::optional<std::int64_t> iters;
};

struct SweepConfig {
  std::vector<ScheduleConfig> schedules;
  std::vector<double> budgets;
};

struct RankConfig {
  std::size_t family_size = 20;
  std::vector<ScheduleConfig> schedules;
  std::vector<double> budgets;
  ScheduleSpec reference = default_spec(ScheduleKind::kLinear);
};

struct SubsampleConfig {
  std::vector<double> budgets;
};

struct RunConfig {
  DatasetConfig dataset;
  ModelConfig model;
  OptimizerConfig optimizer = OptimizerConfig::sgd_defaults();
  /// Momentum-SGD base rate for the AMSGrad equivalent-rate diagnostic.
  double reference_lr = 0.1;
  ScheduleConfig schedule;
  double full_budget_epochs = 100.0;
  BudgetConfig budget;
  std::size_t batch_size = 128;
  std::vector<std::uint64_t> seeds{0};
  /// Iterations between evaluations; 0 means once per epoch.
  std::int64_t eval_every = 0;
  double divergence_threshold = 1e6;
  std::filesystem::path output = "out";

  std::optional<SweepConfig> sweep;
  std::optional<RankConfig> rank;
  std::optional<SubsampleConfig> subsample;
};

/// Parses the JSON config format. Unknown keys are errors.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON text; `parse_run_config(to_json(c))` reproduces `c`.
std::string to_json(const RunConfig& config);

/// Throws ConfigError on the first violated invariant.
void validate(const RunConfig& config);

/// Iteration budget T for the configured budget.
std::int64_t resolve_budget(const RunConfig& config, const BudgetConfig& budget,
                            std::int64_t iters_per_epoch);

/// Budget-aware schedule for a run of `run_iters` iterations.
ScheduleSpec resolve_schedule(const ScheduleConfig& schedule, double full_budget_epochs,
                              std::int64_t run_iters, std::int64_t iters_per_epoch);

Dataset build_dataset(const DatasetConfig& dataset, std::uint64_t run_seed);

Architecture build_architecture(const ModelConfig& model, const Dataset& data);

}  // namespace budgeted
