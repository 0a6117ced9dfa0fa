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
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "budgeted/ranking.hpp"

namespace budgeted {
namespace {

// Tau-b from explicit pair counts.
std::optional<double> brute_force_tau(const std::vector<double>& a, const std::vector<double>& b) {
  long long concordant = 0;
  long long discordant = 0;
  long long only_a = 0;
  long long only_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0 && db == 0) continue;
      if (da == 0) {
        ++only_a;
      } else if (db == 0) {
        ++only_b;
      } else if ((da > 0) == (db > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n1 = static_cast<double>(concordant + discordant + only_b);
  const double n2 = static_cast<double>(concordant + discordant + only_a);
  if (n1 == 0 || n2 == 0) return std::nullopt;
  return static_cast<double>(concordant - discordant) / std::sqrt(n1 * n2);
}

TEST(KendallTau, MatchesPairCountingWithTies) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 40;
    const int levels = 1 + static_cast<int>(gen() % 8);
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(gen() % static_cast<unsigned>(levels));
      b[i] = static_cast<double>(gen() % static_cast<unsigned>(levels + 2));
    }
    const auto expected = brute_force_tau(a, b);
    const auto got = kendall_tau(a, b);
    ASSERT_EQ(got.has_value(), expected.has_value()) << "trial " << trial;
    if (got) {
      EXPECT_NEAR(*got, *expected, 1e-12) << "trial " << trial;
      EXPECT_GE(*got, -1.0);
      EXPECT_LE(*got, 1.0);
    }
  }
}

TEST(KendallTau, ExactOrderingsAndDegenerateInput) {
  const std::vector<double> up = {1, 2, 3, 4, 5};
  const std::vector<double> down = {5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(*kendall_tau(up, up), 1.0);
  EXPECT_DOUBLE_EQ(*kendall_tau(up, down), -1.0);
  const std::vector<double> tied = {2, 2, 2, 2, 2};
  EXPECT_FALSE(kendall_tau(tied, up).has_value());
  EXPECT_THROW(kendall_tau(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
  EXPECT_THROW(kendall_tau(up, std::vector<double>{1, 2}), std::invalid_argument);
  const std::vector<double> with_nan = {1, 2, std::nan(""), 4, 5};
  EXPECT_THROW(kendall_tau(with_nan, up), std::invalid_argument);
}

TEST(Family, DeterministicDistinctAndValid) {
  const auto a = gen_architectures(20, 3, 4, 5);
  const auto b = gen_architectures(20, 3, 4, 5);
  const auto c = gen_architectures(20, 4, 4, 5);
  ASSERT_EQ(a.members.size(), 20u);
  EXPECT_EQ(a.members, b.members);
  EXPECT_NE(a.members, c.members);
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    EXPECT_NO_THROW(validate(a.members[i]));
    EXPECT_EQ(a.members[i].input_dim, 4);
    EXPECT_EQ(a.members[i].num_classes, 5);
    for (std::size_t j = i + 1; j < a.members.size(); ++j) EXPECT_NE(a.members[i], a.members[j]);
  }
  EXPECT_THROW(gen_architectures(1, 0, 2, 2), std::invalid_argument);
}

TEST(RankExperiment, SmallTableIsWellFormed) {
  GeneratorSpec g;
  g.samples = 300;
  g.classes = 3;
  g.separation = 2.0;
  const Dataset data = make_synthetic(g, 1);
  const auto family = gen_architectures(4, 2, 2, 3);
  const std::vector<NamedSchedule> schedules = {{"linear", default_spec(ScheduleKind::kLinear), Conversion::kBac},
                                                {"const", default_spec(ScheduleKind::kConstant), Conversion::kBac}};
  const std::vector<double> budgets = {0.25, 0.5};
  const std::vector<std::uint64_t> seeds = {1};
  RankTask task;
  task.data = &data;
  task.batch_size = 64;
  task.full_budget_epochs = 4;
  task.jobs = 2;
  const RankTable table = rank_experiment(family, schedules, budgets, task, seeds);
  ASSERT_EQ(table.cells.size(), 4u);
  EXPECT_EQ(table.full_accuracy.size(), 4u);
  EXPECT_EQ(table.cell(1, 0).schedule, "const");
  EXPECT_EQ(table.cell(1, 0).budget, 0.25);
  for (const auto& cell : table.cells) {
    EXPECT_EQ(cell.accuracy.size(), 4u);
    if (cell.tau) {
      EXPECT_GE(*cell.tau, -1.0);
      EXPECT_LE(*cell.tau, 1.0);
    }
  }
  task.jobs = 1;
  const RankTable serial = rank_experiment(family, schedules, budgets, task, seeds);
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    EXPECT_EQ(serial.cells[i].accuracy, table.cells[i].accuracy);
  }
  const auto acc = budgeted_accuracy_table(table);
  EXPECT_EQ(acc.size(), 4u);
}

}  // namespace
}  // namespace budgeted
