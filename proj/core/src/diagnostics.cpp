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

#include "budgeted/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "budgeted/text_format.hpp"

namespace budgeted {

double best_progress(const RunRecord& run) {
  const auto best = run.best_eval();
  if (!best) throw std::invalid_argument("best_progress: run has no validation evaluations");
  return run.progress_of(run.evals[*best]);
}

std::optional<double> pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("correlation: series lengths differ");
  const std::size_t n = a.size();
  if (n < 2) return std::nullopt;
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (!(var_a > 0.0) || !(var_b > 0.0)) return std::nullopt;
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

ConvergenceReport convergence_report(const RunRecord& run) {
  if (run.evals.empty()) throw std::invalid_argument("convergence_report: run has no gradient-norm series");
  ConvergenceReport report;
  const EvalPoint& last = run.evals.back();
  report.final_grad_norm = last.full_grad_norm;
  report.final_weight_norm = last.weight_norm;
  for (const auto& e : run.evals) report.peak_grad_norm = std::max(report.peak_grad_norm, e.full_grad_norm);
  report.final_to_peak_ratio =
      report.peak_grad_norm > 0.0 ? report.final_grad_norm / report.peak_grad_norm : 0.0;
  report.best_progress = best_progress(run);
  report.best_val_acc = run.best_val_acc();

  std::vector<double> lr;
  std::vector<double> grad;
  for (const auto& e : run.evals) {
    if (e.iteration < 1 || static_cast<std::size_t>(e.iteration) > run.iterations.size()) {
      throw std::invalid_argument("convergence_report: evaluation outside the iteration series");
    }
    lr.push_back(run.iterations[static_cast<std::size_t>(e.iteration - 1)].lr);
    grad.push_back(e.full_grad_norm);
  }
  report.lr_grad_correlation = pearson_correlation(lr, grad);
  return report;
}

std::string format_report(const ConvergenceReport& r) {
  std::ostringstream out;
  out << "final_grad_norm=" << format_double(r.final_grad_norm) << '\n'
      << "final_weight_norm=" << format_double(r.final_weight_norm) << '\n'
      << "peak_grad_norm=" << format_double(r.peak_grad_norm) << '\n'
      << "final_to_peak_ratio=" << format_double(r.final_to_peak_ratio) << '\n'
      << "best_progress=" << format_double(r.best_progress) << '\n'
      << "best_val_acc=" << format_double(r.best_val_acc) << '\n'
      << "lr_grad_correlation="
      << (r.lr_grad_correlation ? format_double(*r.lr_grad_correlation) : "undefined") << '\n';
  return out.str();
}

std::string report_csv_header() {
  return "final_grad_norm,final_weight_norm,peak_grad_norm,final_to_peak_ratio,best_progress,"
         "best_val_acc,lr_grad_correlation";
}

std::string report_csv_row(const ConvergenceReport& r) {
  std::ostringstream out;
  out << format_double(r.final_grad_norm) << ',' << format_double(r.final_weight_norm) << ','
      << format_double(r.peak_grad_norm) << ',' << format_double(r.final_to_peak_ratio) << ','
      << format_double(r.best_progress) << ',' << format_double(r.best_val_acc) << ','
      << (r.lr_grad_correlation ? format_double(*r.lr_grad_correlation) : "nan");
  return out.str();
}

}  // namespace budgeted
