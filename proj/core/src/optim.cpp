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

#include "budgeted/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace budgeted {
namespace {

void check_step_inputs(const OptimizerState& state, std::span<const double> grad,
                       OptimizerKind expected) {
  if (state.kind != expected) {
    throw std::invalid_argument(std::string("optimizer: state belongs to ") +
                                std::string(to_string(state.kind)));
  }
  if (grad.size() != state.weights.size()) {
    throw std::invalid_argument("optimizer: gradient has " + std::to_string(grad.size()) +
                                " entries, weights have " +
                                std::to_string(state.weights.size()));
  }
  for (double g : grad) {
    if (!std::isfinite(g)) throw std::invalid_argument("optimizer: non-finite gradient entry");
  }
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAmsgrad ? "amsgrad" : "sgd";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "sgd" || name == "momentum") return OptimizerKind::kSgdMomentum;
  if (name == "amsgrad") return OptimizerKind::kAmsgrad;
  throw std::invalid_argument("optimizer: unknown kind '" + std::string(name) + "'");
}

OptimizerConfig OptimizerConfig::sgd_defaults() {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kSgdMomentum;
  cfg.base_lr = 0.1;
  cfg.momentum = 0.9;
  return cfg;
}

OptimizerConfig OptimizerConfig::amsgrad_defaults() {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kAmsgrad;
  cfg.base_lr = 0.001;
  cfg.momentum = 0.9;
  cfg.second_moment = 0.99;
  cfg.epsilon = 1e-8;
  return cfg;
}

void validate(const OptimizerConfig& cfg) {
  if (!(cfg.base_lr > 0.0) || !std::isfinite(cfg.base_lr)) {
    throw std::invalid_argument("optimizer.base_lr must be positive");
  }
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw std::invalid_argument("optimizer.momentum must lie in [0, 1)");
  }
  if (!(cfg.second_moment >= 0.0 && cfg.second_moment < 1.0)) {
    throw std::invalid_argument("optimizer.second_moment must lie in [0, 1)");
  }
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("optimizer.epsilon must be positive");
  if (!(cfg.weight_decay >= 0.0)) {
    throw std::invalid_argument("optimizer.weight_decay must be non-negative");
  }
}

OptimizerState OptimizerState::init(std::vector<double> weights, OptimizerKind kind) {
  OptimizerState state;
  state.kind = kind;
  const auto n = weights.size();
  state.weights = std::move(weights);
  state.momentum.assign(n, 0.0);
  if (kind == OptimizerKind::kAmsgrad) {
    state.second_moment.assign(n, 0.0);
    state.second_moment_max.assign(n, 0.0);
  }
  return state;
}

OptimizerState& sgd_momentum_step(OptimizerState& state, std::span<const double> grad,
                                  double ratio, const OptimizerConfig& cfg) {
  check_step_inputs(state, grad, OptimizerKind::kSgdMomentum);
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("optimizer: schedule ratio must lie in [0, 1]");
  }
  const double step = cfg.base_lr * ratio;
  const double keep = cfg.momentum;
  const double mix = 1.0 - cfg.momentum;
  auto& w = state.weights;
  auto& m = state.momentum;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double g = grad[i] + cfg.weight_decay * w[i];
    m[i] = keep * m[i] + mix * g;
    w[i] -= step * m[i];
  }
  ++state.step_count;
  return state;
}

OptimizerState& amsgrad_step(OptimizerState& state, std::span<const double> grad,
                             const OptimizerConfig& cfg, double ratio) {
  check_step_inputs(state, grad, OptimizerKind::kAmsgrad);
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("optimizer: schedule ratio must lie in [0, 1]");
  }
  const auto t = static_cast<double>(state.step_count + 1);
  const double m_correction = 1.0 - std::pow(cfg.momentum, t);
  const double v_correction = 1.0 - std::pow(cfg.second_moment, t);
  const double step = cfg.base_lr * ratio;

  auto& w = state.weights;
  auto& m = state.momentum;
  auto& v = state.second_moment;
  auto& v_max = state.second_moment_max;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double g = grad[i] + cfg.weight_decay * w[i];
    m[i] = cfg.momentum * m[i] + (1.0 - cfg.momentum) * g;
    v[i] = cfg.second_moment * v[i] + (1.0 - cfg.second_moment) * g * g;
    const double m_hat = m[i] / m_correction;
    const double v_hat = v[i] / v_correction;
    v_max[i] = std::max(v_max[i], v_hat);
    w[i] -= step * m_hat / (std::sqrt(v_max[i]) + cfg.epsilon);
  }
  ++state.step_count;
  return state;
}

OptimizerState& optimizer_step(OptimizerState& state, std::span<const double> grad,
                               double ratio, const OptimizerConfig& cfg) {
  if (cfg.kind == OptimizerKind::kAmsgrad) return amsgrad_step(state, grad, cfg, ratio);
  return sgd_momentum_step(state, grad, ratio, cfg);
}

std::vector<double> equivalent_lr_per_weight(const OptimizerState& state,
                                             const OptimizerConfig& ams_cfg,
                                             double sgd_base_lr) {
  if (state.kind != OptimizerKind::kAmsgrad) {
    throw std::invalid_argument("equivalent_lr: needs an AMSGrad state");
  }
  if (state.step_count < 1) {
    throw std::invalid_argument("equivalent_lr: needs at least one AMSGrad step");
  }
  if (!(sgd_base_lr > 0.0)) throw std::invalid_argument("equivalent_lr: sgd base lr must be positive");
  const double scale = ams_cfg.base_lr / sgd_base_lr;
  const double m_correction =
      1.0 - std::pow(ams_cfg.momentum, static_cast<double>(state.step_count));
  std::vector<double> out(state.second_moment_max.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = scale / (m_correction * (std::sqrt(state.second_moment_max[i]) + ams_cfg.epsilon));
  }
  return out;
}

double equivalent_lr(const OptimizerState& state, const OptimizerConfig& ams_cfg,
                     double sgd_base_lr) {
  return median(equivalent_lr_per_weight(state, ams_cfg, sgd_base_lr));
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace budgeted
