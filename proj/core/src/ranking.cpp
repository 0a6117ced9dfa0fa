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

#include "budgeted/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "budgeted/parallel.hpp"
#include "budgeted/rng.hpp"
#include "budgeted/train.hpp"

namespace budgeted {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Pairs tied within runs of equal values of a sorted sequence.
template <typename Equal>
std::int64_t tied_pairs(std::size_t n, Equal&& equal) {
  std::int64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      ties += static_cast<std::int64_t>(run * (run - 1) / 2);
      run = 1;
    }
  }
  return ties;
}

/// Stable merge sort of `v` counting pairs i < j with v[i] > v[j].
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& scratch,
                              std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

ArchitectureFamily gen_architectures(std::size_t count, std::uint64_t seed, int input_dim,
                                     int num_classes) {
  if (count < 2) throw std::invalid_argument("gen_architectures: need at least 2 architectures");
  ArchitectureFamily family;
  family.seed = seed;
  Rng rng(derive_seed(seed, 0xA2C4));
  while (family.members.size() < count) {
    Architecture arch;
    arch.input_dim = input_dim;
    arch.num_classes = num_classes;
    const int depth = 1 + static_cast<int>(rng.below(3));
    for (int l = 0; l < depth; ++l) {
      const bool skip = l > 0 && rng.below(2) == 1;
      const int width = skip ? arch.hidden.back() : 8 + static_cast<int>(rng.below(57));
      arch.hidden.push_back(width);
      arch.skip.push_back(skip);
    }
    // Resample on collision so every member is distinct.
    if (std::find(family.members.begin(), family.members.end(), arch) == family.members.end()) {
      family.members.push_back(std::move(arch));
    }
  }
  return family;
}

std::optional<double> kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("kendall_tau: lists differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("kendall_tau: need at least 2 scores");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) throw std::invalid_argument("kendall_tau: NaN score");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i] < a[j] || (a[i] == a[j] && b[i] < b[j]);
  });
  const std::int64_t ties_a =
      tied_pairs(n, [&](std::size_t i, std::size_t j) { return a[order[i]] == a[order[j]]; });
  const std::int64_t ties_joint = tied_pairs(n, [&](std::size_t i, std::size_t j) {
    return a[order[i]] == a[order[j]] && b[order[i]] == b[order[j]];
  });

  std::vector<double> sorted_b(n);
  for (std::size_t i = 0; i < n; ++i) sorted_b[i] = b[order[i]];
  std::vector<double> scratch(n);
  const std::int64_t discordant = count_inversions(sorted_b, scratch, 0, n);
  // sorted_b is now ascending.
  const std::int64_t ties_b =
      tied_pairs(n, [&](std::size_t i, std::size_t j) { return sorted_b[i] == sorted_b[j]; });

  const auto pairs = static_cast<std::int64_t>(n * (n - 1) / 2);
  const std::int64_t untied_a = pairs - ties_a;
  const std::int64_t untied_b = pairs - ties_b;
  if (untied_a == 0 || untied_b == 0) return std::nullopt;
  const std::int64_t score = pairs - ties_a - ties_b + ties_joint - 2 * discordant;
  return static_cast<double>(score) /
         std::sqrt(static_cast<double>(untied_a) * static_cast<double>(untied_b));
}

RankTable rank_experiment(const ArchitectureFamily& family, std::span<const NamedSchedule> schedules,
                          std::span<const double> budgets, const RankTask& task,
                          std::span<const std::uint64_t> seeds) {
  if (task.data == nullptr) throw std::invalid_argument("rank_experiment: no dataset");
  if (family.members.size() < 2) throw std::invalid_argument("rank_experiment: need at least 2 architectures");
  if (schedules.empty() || budgets.empty()) throw std::invalid_argument("rank_experiment: empty grid");
  if (seeds.empty()) throw std::invalid_argument("rank_experiment: need at least one seed");
  if (task.full_budget_epochs < 1) throw std::invalid_argument("rank_experiment: full budget must be positive");
  for (double b : budgets) {
    if (!(b > 0.0 && b <= 1.0)) {
      throw std::invalid_argument("rank_experiment: budgets are fractions of the full budget in (0, 1]");
    }
  }

  const Dataset& data = *task.data;
  const std::int64_t per_epoch = iterations_per_epoch(data.train.size(), task.batch_size);
  const std::int64_t full_iters = task.full_budget_epochs * per_epoch;
  const std::size_t n_arch = family.members.size();
  const std::size_t n_cells = schedules.size() * budgets.size();
  // Config 0 is the full-budget reference; config 1 + c is cell c.
  const std::size_t n_configs = 1 + n_cells;

  struct Job {
    std::size_t arch;
    std::size_t config;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < n_arch; ++a) {
    for (std::size_t c = 0; c < n_configs; ++c) {
      for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({a, c, s});
    }
  }
  std::vector<double> best(jobs.size(), kNaN);
  std::vector<char> diverged(jobs.size(), 0);

  parallel_for(jobs.size(), task.jobs, [&](std::size_t j) {
    const Job& job = jobs[j];
    const Network network(family.members[job.arch]);
    ScheduleSpec schedule = task.reference;
    std::int64_t budget = full_iters;
    if (job.config > 0) {
      const std::size_t cell = job.config - 1;
      const NamedSchedule& named = schedules[cell / budgets.size()];
      budget = budget_from_fraction(budgets[cell % budgets.size()], full_iters);
      schedule = make_budget_aware(named.spec, named.conversion,
                                   static_cast<double>(task.full_budget_epochs),
                                   static_cast<double>(budget) / static_cast<double>(per_epoch));
    }
    TrainOptions options;
    options.budget_iters = budget;
    options.batch_size = task.batch_size;
    options.seed = seeds[job.seed];
    const RunRecord run = train_budgeted(network, data, schedule, task.optimizer, options);
    diverged[j] = run.diverged ? 1 : 0;
    best[j] = run.best_val_acc();
  });

  RankTable table;
  for (const auto& s : schedules) table.schedules.push_back(s.name);
  table.budgets.assign(budgets.begin(), budgets.end());

  // accuracy[config][arch]
  std::vector<std::vector<double>> accuracy(n_configs, std::vector<double>(n_arch, kNaN));
  std::vector<char> excluded(n_arch, 0);
  for (std::size_t a = 0; a < n_arch; ++a) {
    for (std::size_t c = 0; c < n_configs; ++c) {
      std::vector<double> per_seed;
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        const std::size_t j = (a * n_configs + c) * seeds.size() + s;
        if (diverged[j]) excluded[a] = 1;
        per_seed.push_back(best[j]);
      }
      accuracy[c][a] = median_of(std::move(per_seed));
    }
  }
  for (std::size_t a = 0; a < n_arch; ++a) {
    if (excluded[a]) {
      table.excluded.push_back(a);
      for (auto& row : accuracy) row[a] = kNaN;
    }
  }
  if (table.excluded.size() == n_arch) throw std::runtime_error("rank_experiment: every architecture diverged");

  table.full_accuracy = accuracy[0];
  std::vector<double> reference;
  for (std::size_t a = 0; a < n_arch; ++a) {
    if (!excluded[a]) reference.push_back(accuracy[0][a]);
  }
  for (std::size_t c = 0; c < n_cells; ++c) {
    RankCell cell;
    cell.schedule = schedules[c / budgets.size()].name;
    cell.budget = budgets[c % budgets.size()];
    cell.accuracy = accuracy[1 + c];
    std::vector<double> predicted;
    for (std::size_t a = 0; a < n_arch; ++a) {
      if (!excluded[a]) predicted.push_back(cell.accuracy[a]);
    }
    if (predicted.size() >= 2) cell.tau = kendall_tau(predicted, reference);
    table.cells.push_back(std::move(cell));
  }
  return table;
}

std::vector<AccuracyCell> budgeted_accuracy_table(const RankTable& table) {
  std::vector<AccuracyCell> out;
  for (const RankCell& cell : table.cells) {
    AccuracyCell row;
    row.schedule = cell.schedule;
    row.budget = cell.budget;
    double raw = 0.0;
    double normalized = 0.0;
    std::size_t count = 0;
    for (std::size_t a = 0; a < cell.accuracy.size(); ++a) {
      if (std::isnan(cell.accuracy[a]) || std::isnan(table.full_accuracy[a])) continue;
      raw += cell.accuracy[a];
      normalized += table.full_accuracy[a] > 0.0 ? cell.accuracy[a] / table.full_accuracy[a] : 0.0;
      ++count;
    }
    if (count > 0) {
      row.raw_mean = raw / static_cast<double>(count);
      row.normalized_mean = normalized / static_cast<double>(count);
    }
    out.push_back(row);
  }
  return out;
}

std::vector<AccuracyCell> budgeted_accuracy_table(const ArchitectureFamily& family,
                                                  std::span<const NamedSchedule> schedules,
                                                  std::span<const double> budgets,
                                                  const RankTask& task,
                                                  std::span<const std::uint64_t> seeds) {
  return budgeted_accuracy_table(rank_experiment(family, schedules, budgets, task, seeds));
}

}  // namespace budgeted
