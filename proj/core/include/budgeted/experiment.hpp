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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "budgeted/ranking.hpp"
#include "budgeted/run_config.hpp"
#include "budgeted/train.hpp"

namespace budgeted {

/// Flags shared by the config-driven subcommands.
struct CommandOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  bool overwrite = false;
};

/// Loads the config and applies the --out and --seed overrides.
RunConfig load_for_command(const CommandOptions& options);

RunRecord execute_run(const RunConfig& config, const ScheduleConfig& schedule,
                      const BudgetConfig& budget, std::uint64_t seed, const Dataset& data);
/// Uses the config's own schedule and budget and builds the dataset for `seed`.
RunRecord execute_run(const RunConfig& config, std::uint64_t seed);

struct SweepCell {
  std::string schedule;
  double budget = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double best_val_acc = 0.0;
  double best_progress = 0.0;
  double final_grad_norm = 0.0;
  bool diverged = false;
  /// Loaded from a previous, interrupted invocation.
  bool resumed = false;
};

struct SweepResult {
  std::vector<std::string> schedules;
  std::vector<double> budgets;
  /// Ordered schedule, budget, seed.
  std::vector<SweepCell> cells;
  /// Median best accuracy over successful seeds, schedules-major; NaN when
  /// no seed of a cell succeeded.
  std::vector<double> medians;

  double median(std::size_t schedule, std::size_t budget) const {
    return medians[schedule * budgets.size() + budget];
  }
};

/// Runs schedules x budgets x seeds. With a non-empty `out`, every run is
/// persisted under out/cells and finished cells are reused on restart.
SweepResult run_sweep(const RunConfig& config, const std::filesystem::path& out, unsigned jobs,
                      bool overwrite);

struct RankSummary {
  std::vector<std::string> schedules;
  std::vector<double> budgets;
  /// One experiment per seed: its own architecture family and training seed.
  std::vector<std::uint64_t> seeds;
  std::vector<RankTable> tables;
  /// Median tau over experiments with a defined tau, schedules-major.
  std::vector<std::optional<double>> median_tau;

  std::optional<double> tau(std::size_t schedule, std::size_t budget) const {
    return median_tau[schedule * budgets.size() + budget];
  }
};

RankSummary run_rank(const RunConfig& config, const std::filesystem::path& out, unsigned jobs,
                     bool overwrite);

struct SubsampleRow {
  double budget = 0.0;
  /// Median over seeds: full data with a limited iteration count.
  double full_acc = 0.0;
  /// Median over seeds: subsampled data with the full epoch count.
  double subset_acc = 0.0;
};

/// The config schedule is budget-unaware (time in epochs). "Full" applies
/// it with BAC over the budget; "subset" replays it unchanged over
/// `full_budget_epochs` epochs of a `budget`-fraction subset.
std::vector<SubsampleRow> run_subsample_compare(const RunConfig& config,
                                                const std::filesystem::path& out, unsigned jobs,
                                                bool overwrite);

/// `progress,ratio` rows at `points` evenly spaced progress values; the
/// last sample is the largest double below 1.
std::string schedule_curve_csv(const ScheduleSpec& spec, std::size_t points);

int cmd_run(const CommandOptions& options, std::ostream& log);
int cmd_sweep(const CommandOptions& options, std::ostream& log);
int cmd_rank(const CommandOptions& options, std::ostream& log);
int cmd_subsample_compare(const CommandOptions& options, std::ostream& log);
/// `params` are key=value tokens in the schedule text form.
int cmd_schedule(std::string_view kind, std::span<const std::string> params, std::size_t points,
                 std::ostream& out);

/// Gaussian blobs with four classes, 4000 examples and a two-hidden-layer
/// MLP trained with momentum SGD; full budget 100 epochs.
RunConfig standard_toy_config();

}  // namespace budgeted
