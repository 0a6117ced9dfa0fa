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
#include <string>
#include <string_view>
#include <vector>

namespace budgeted {

enum class ScheduleKind {
  kConstant,
  kStep,
  kExponential,
  kPoly,
  kCosine,
  kHtd,
  kLinear,
  kSgdrUnaware,
  kSgdrAware,
};

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

/// Declarative learning-rate schedule. Values are ratios to the base rate.
///
/// A schedule is budget-aware when it is a function of training progress
/// p = t/T only. Budget-unaware schedules (exponential, step with absolute
/// drop times, sgdr-unaware) are functions of absolute time in their own
/// unit; `bac_convert` turns them into budget-aware ones.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::kLinear;

  /// Drop factor for step/exponential, exponent for poly.
  double gamma = 0.0;
  /// Lower-bound ratio for cosine, htd and sgdr.
  double eta = 0.0;
  double lower_l = -6.0;
  double upper_u = 3.0;

  /// Budget-aware step drops, as progress fractions in (0, 1).
  std::vector<double> drops;
  /// Budget-unaware step drops, in absolute schedule time.
  std::vector<double> drop_times;

  double t0_period = 10.0;
  double t_mult = 2.0;
  std::int64_t n_restarts = 1;

  /// Original budget T0 of a BAC-converted exponential or sgdr schedule;
  /// zero means "not converted".
  double bac_origin = 0.0;

  /// Linear warm-up span in iterations, applied by `lr_ratio`.
  std::int64_t warmup_iters = 0;

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// Spec for `kind` with the documented defaults filled in
/// (gamma 0.1 for step, 0.9 for poly; eta 0; (L, U) = (-6, 3)).
ScheduleSpec default_spec(ScheduleKind kind);

/// Budget-aware step decay that drops `times` times at even intervals.
ScheduleSpec step_even(int times, double gamma = 0.1);

/// Throws std::invalid_argument when an invariant of `spec` is violated.
void validate(const ScheduleSpec& spec);

bool is_budget_aware(const ScheduleSpec& spec);

/// Position within a budget: iteration t of T, progress t/T.
class BudgetClock {
 public:
  BudgetClock(std::int64_t t, std::int64_t total);

  std::int64_t t() const { return t_; }
  std::int64_t total() const { return total_; }
  double progress() const {
    return static_cast<double>(t_) / static_cast<double>(total_);
  }

 private:
  std::int64_t t_;
  std::int64_t total_;
};

/// Ratio of a budget-aware schedule at `clock`.
double eval_schedule(const ScheduleSpec& spec, const BudgetClock& clock);
/// Same, at a raw progress value in [0, 1).
double eval_schedule_at(const ScheduleSpec& spec, double progress);

/// Ratio of a budget-unaware schedule at absolute time `t`.
double eval_unaware(const ScheduleSpec& spec, double t);

/// Budget-aware conversion: the result satisfies
/// eval_schedule(result, p) == eval_unaware(spec, p * original_budget).
ScheduleSpec bac_convert(const ScheduleSpec& spec, double original_budget);

/// Periodic cosine with warm restarts. Period i has length
/// t0_period * t_mult^(i-1).
double sgdr_value(double t0_period, double t_mult, double t, double eta = 0.0);

/// Cosine decay restarted `n_restarts` times at even progress intervals.
double sgdr_budget_aware(std::int64_t n_restarts, const BudgetClock& clock,
                         double eta = 0.0);
double sgdr_budget_aware_at(std::int64_t n_restarts, double progress,
                            double eta = 0.0);

/// Warm-up composition: a linear ramp (t+1)/warmup_iters times the base
/// ratio at zero progress, then the base schedule over the remaining span.
double apply_warmup(const ScheduleSpec& base, std::int64_t warmup_iters,
                    const BudgetClock& clock);

/// The ratio used by training: `apply_warmup(spec, spec.warmup_iters, clock)`.
double lr_ratio(const ScheduleSpec& spec, const BudgetClock& clock);

enum class Conversion {
  /// Rescale over the original budget.
  kBac,
  /// Replay the original schedule in absolute time and stop at the budget.
  kEarlyStop,
};

/// Budget-aware form of `spec` for a run of `run_budget` time units.
/// Budget-aware specs are returned unchanged. Early stopping is BAC with
/// the run's own budget as the original one.
ScheduleSpec make_budget_aware(const ScheduleSpec& spec, Conversion conversion,
                               double original_budget, double run_budget);

/// Flat key-value text form, e.g. "kind=step gamma=0.1 drops=0.25,0.5".
std::string format_schedule(const ScheduleSpec& spec);
ScheduleSpec parse_schedule(std::string_view text);

}  // namespace budgeted
