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

#include "budgeted/diagnostics.hpp"

namespace budgeted {
namespace {

RunRecord synthetic_run(const std::vector<double>& acc, const std::vector<double>& grad,
                        std::int64_t every) {
  RunRecord run;
  run.meta.budget = every * static_cast<std::int64_t>(acc.size());
  for (std::int64_t t = 0; t < run.meta.budget; ++t) {
    const double beta = 1.0 - static_cast<double>(t) / static_cast<double>(run.meta.budget);
    run.iterations.push_back({t, beta, 0.1 * beta, 1.0});
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    EvalPoint e;
    e.iteration = every * static_cast<std::int64_t>(i + 1);
    e.epoch = static_cast<double>(i + 1);
    e.val_acc = acc[i];
    e.full_grad_norm = grad[i];
    e.weight_norm = 2.0;
    run.evals.push_back(e);
  }
  return run;
}

TEST(BestProgress, MonotoneSeriesPeaksAtEnd) {
  const auto run = synthetic_run({0.1, 0.2, 0.3, 0.4}, {1, 1, 1, 1}, 5);
  EXPECT_DOUBLE_EQ(best_progress(run), 1.0);
}

TEST(BestProgress, InvariantUnderMonotoneTransform) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> acc(12);
    for (auto& a : acc) a = std::round(u(gen) * 20) / 20;
    std::vector<double> squashed(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) squashed[i] = std::exp(3 * acc[i]) - 7;
    const std::vector<double> g(12, 1.0);
    EXPECT_EQ(best_progress(synthetic_run(acc, g, 3)), best_progress(synthetic_run(squashed, g, 3)));
  }
}

TEST(BestProgress, NoEvaluationsThrows) {
  EXPECT_THROW(best_progress(RunRecord{}), std::invalid_argument);
}

TEST(Pearson, KnownValuesAndDegenerateCases) {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {2, 4, 6, 8};
  const std::vector<double> z = {4, 3, 2, 1};
  EXPECT_NEAR(*pearson_correlation(x, y), 1.0, 1e-15);
  EXPECT_NEAR(*pearson_correlation(x, z), -1.0, 1e-15);
  const std::vector<double> flat = {5, 5, 5, 5};
  EXPECT_FALSE(pearson_correlation(x, flat).has_value());
  EXPECT_FALSE(pearson_correlation(std::vector<double>{1}, std::vector<double>{2}).has_value());
  const std::vector<double> a = {1, 2, 3};
  const std::vector<double> b = {1, 3, 2};
  EXPECT_NEAR(*pearson_correlation(a, b), 0.5, 1e-15);
}

TEST(ConvergenceReportTest, SummarisesSeries) {
  const auto run = synthetic_run({0.5, 0.9, 0.7, 0.9}, {4.0, 8.0, 2.0, 1.0}, 10);
  const auto r = convergence_report(run);
  EXPECT_EQ(r.final_grad_norm, 1.0);
  EXPECT_EQ(r.peak_grad_norm, 8.0);
  EXPECT_EQ(r.final_to_peak_ratio, 0.125);
  EXPECT_EQ(r.final_weight_norm, 2.0);
  EXPECT_DOUBLE_EQ(r.best_progress, 0.5);
  EXPECT_EQ(r.best_val_acc, 0.9);
  // lr at iterations 10, 20, 30, 40 decreases linearly.
  std::vector<double> lr;
  for (std::int64_t i : {9, 19, 29, 39}) lr.push_back(run.iterations[static_cast<std::size_t>(i)].lr);
  EXPECT_NEAR(*r.lr_grad_correlation, *pearson_correlation(lr, std::vector<double>{4, 8, 2, 1}), 1e-15);
}

TEST(ConvergenceReportTest, ConstantLrLeavesCorrelationUndefined) {
  auto run = synthetic_run({0.5, 0.6}, {3.0, 1.0}, 4);
  for (auto& p : run.iterations) p.lr = 0.1;
  const auto r = convergence_report(run);
  EXPECT_FALSE(r.lr_grad_correlation.has_value());
  EXPECT_NE(format_report(r).find("lr_grad_correlation=undefined"), std::string::npos);
  const std::string row = report_csv_row(r);
  EXPECT_EQ(row.substr(row.rfind(',') + 1), "nan");
}

TEST(ConvergenceReportTest, FormattingHasOneLinePerField) {
  const auto r = convergence_report(synthetic_run({0.2, 0.4}, {2.0, 1.0}, 2));
  const std::string text = format_report(r);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
  EXPECT_NE(text.find("final_to_peak_ratio=0.5\n"), std::string::npos);
  const std::string header = report_csv_header();
  const std::string row = report_csv_row(r);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
}

}  // namespace
}  // namespace budgeted
