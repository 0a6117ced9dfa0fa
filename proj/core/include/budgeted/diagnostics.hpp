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

#include <optional>
#include <span>
#include <string>

#include "budgeted/train.hpp"

namespace budgeted {

struct ConvergenceReport {
  double final_grad_norm = 0.0;
  double final_weight_norm = 0.0;
  double peak_grad_norm = 0.0;
  /// final_grad_norm / peak_grad_norm.
  double final_to_peak_ratio = 0.0;
  /// Progress of the best validation checkpoint.
  double best_progress = 0.0;
  double best_val_acc = 0.0;
  /// Pearson correlation between the per-evaluation learning rate and the
  /// full gradient norm; empty when either series has zero variance.
  std::optional<double> lr_grad_correlation;

  friend bool operator==(const ConvergenceReport&, const ConvergenceReport&) = default;
};

/// Progress of the evaluation with maximal validation accuracy, ties to the
/// earliest. Throws when the run has no evaluations.
double best_progress(const RunRecord& run);

ConvergenceReport convergence_report(const RunRecord& run);

/// Pearson correlation; empty for fewer than two points or zero variance.
std::optional<double> pearson_correlation(std::span<const double> a, std::span<const double> b);

/// "key=value" lines. An undefined correlation prints as "undefined".
std::string format_report(const ConvergenceReport& report);

/// One CSV row; an undefined correlation is written as nan.
std::string report_csv_header();
std::string report_csv_row(const ConvergenceReport& report);

}  // namespace budgeted
