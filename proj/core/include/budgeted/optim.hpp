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
#include <span>
#include <string_view>
#include <vector>

namespace budgeted {

enum class OptimizerKind { kSgdMomentum, kAmsgrad };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgdMomentum;
  double base_lr = 0.1;
  double momentum = 0.9;
  double second_moment = 0.99;
  double epsilon = 1e-8;
  /// Coupled L2: lambda * w is added to the gradient.
  double weight_decay = 0.0;

  static OptimizerConfig sgd_defaults();
  static OptimizerConfig amsgrad_defaults();

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

void validate(const OptimizerConfig& cfg);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kSgdMomentum;
  std::vector<double> weights;
  std::vector<double> momentum;
  std::vector<double> second_moment;
  std::vector<double> second_moment_max;
  /// Completed steps.
  std::int64_t step_count = 0;

  /// Fresh state with zeroed buffers for `weights`.
  static OptimizerState init(std::vector<double> weights, OptimizerKind kind);
};

/// Dampened momentum SGD:
///   m_t = momentum * m_{t-1} + (1 - momentum) * g_t
///   w_t = w_{t-1} - base_lr * ratio * m_t
/// Updates `state` in place and returns it.
OptimizerState& sgd_momentum_step(OptimizerState& state, std::span<const double> grad,
                                  double ratio, const OptimizerConfig& cfg);

/// AMSGrad with bias-corrected moments and a running max of the corrected
/// second moment. `ratio` scales base_lr (1 for the plain optimizer).
OptimizerState& amsgrad_step(OptimizerState& state, std::span<const double> grad,
                             const OptimizerConfig& cfg, double ratio = 1.0);

/// Dispatches on `cfg.kind`.
OptimizerState& optimizer_step(OptimizerState& state, std::span<const double> grad,
                               double ratio, const OptimizerConfig& cfg);

/// Per-weight ratio that makes an AMSGrad step comparable to a momentum-SGD
/// step with base rate `sgd_base_lr`.
std::vector<double> equivalent_lr_per_weight(const OptimizerState& state,
                                             const OptimizerConfig& ams_cfg,
                                             double sgd_base_lr);

/// Median of `equivalent_lr_per_weight`.
double equivalent_lr(const OptimizerState& state, const OptimizerConfig& ams_cfg,
                     double sgd_base_lr);

double median(std::vector<double> values);

}  // namespace budgeted
