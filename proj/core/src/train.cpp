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

#include "budgeted/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "budgeted/rng.hpp"

namespace budgeted {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

}  // namespace

std::optional<std::size_t> RunRecord::best_eval() const {
  if (evals.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < evals.size(); ++i) {
    if (evals[i].val_acc > evals[best].val_acc) best = i;
  }
  return best;
}

double RunRecord::best_val_acc() const {
  const auto best = best_eval();
  return best ? evals[*best].val_acc : 0.0;
}

double RunRecord::progress_of(const EvalPoint& eval) const {
  return static_cast<double>(eval.iteration) / static_cast<double>(meta.budget);
}

std::int64_t iterations_per_epoch(std::size_t n, std::size_t batch_size) {
  if (n == 0 || batch_size == 0) {
    throw std::invalid_argument("iterations_per_epoch: need examples and a positive batch size");
  }
  return static_cast<std::int64_t>((n + batch_size - 1) / batch_size);
}

std::int64_t budget_from_fraction(double fraction, std::int64_t full_budget_iters) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("budget fraction must lie in (0, 1]");
  }
  if (full_budget_iters < 1) throw std::invalid_argument("full budget must be positive");
  const auto iters = std::llround(fraction * static_cast<double>(full_budget_iters));
  return std::max<std::int64_t>(1, iters);
}

RunRecord train_budgeted(const Objective& objective, const Dataset& data,
                         std::vector<double> initial_weights, const ScheduleSpec& schedule,
                         const OptimizerConfig& optimizer, const TrainOptions& options) {
  if (options.budget_iters < 1) throw std::invalid_argument("train: budget must be at least 1 iteration");
  if (options.batch_size < 1) throw std::invalid_argument("train: batch size must be at least 1");
  if (options.eval_every < 0) throw std::invalid_argument("train: eval cadence must be non-negative");
  if (data.train.size() == 0) throw std::invalid_argument("train: training split is empty");
  if (data.val.size() == 0) throw std::invalid_argument("train: validation split is empty");
  if (initial_weights.size() != objective.num_params()) {
    throw std::invalid_argument("train: initial weights do not match the model");
  }
  validate(schedule);
  validate(optimizer);
  if (!is_budget_aware(schedule)) {
    throw std::invalid_argument("train: schedule is budget-unaware; apply bac_convert first");
  }
  if (schedule.warmup_iters >= options.budget_iters && schedule.warmup_iters > 0) {
    throw std::invalid_argument("train: warm-up must be shorter than the budget");
  }

  const std::size_t n = data.train.size();
  const std::int64_t budget = options.budget_iters;
  const std::int64_t per_epoch = iterations_per_epoch(n, options.batch_size);
  const std::int64_t eval_every = options.eval_every > 0 ? options.eval_every : per_epoch;

  RunRecord record;
  record.meta.seed = options.seed;
  record.meta.schedule = schedule;
  record.meta.optimizer = optimizer;
  record.meta.budget = budget;
  record.meta.batch_size = options.batch_size;
  record.meta.iters_per_epoch = per_epoch;
  record.meta.eval_every = eval_every;
  record.meta.dataset_fingerprint = data.fingerprint;
  record.meta.train_size = n;
  if (const auto* net = dynamic_cast<const Network*>(&objective)) {
    record.meta.model = describe(net->architecture());
  } else {
    record.meta.model = "objective";
  }
  record.iterations.reserve(static_cast<std::size_t>(budget));

  OptimizerState state = OptimizerState::init(std::move(initial_weights), optimizer.kind);
  std::vector<double> grad(objective.num_params());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> rows;
  rows.reserve(options.batch_size);

  const auto evaluate = [&](std::int64_t done) {
    EvalPoint point;
    point.iteration = done;
    point.epoch = static_cast<double>(done) / static_cast<double>(per_epoch);
    point.val_acc = objective.accuracy(state.weights, data.val);
    point.full_grad_norm = full_gradient_norm(objective, state.weights, data.train);
    point.weight_norm = l2_norm(state.weights);
    point.equivalent_lr = optimizer.kind == OptimizerKind::kAmsgrad
                              ? equivalent_lr(state, optimizer, options.sgd_reference_lr)
                              : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(point.full_grad_norm)) throw DivergenceError("non-finite full gradient");
    record.evals.push_back(point);
  };

  try {
    for (std::int64_t t = 0; t < budget; ++t) {
      const std::int64_t position = t % per_epoch;
      if (position == 0) {
        const auto epoch = static_cast<std::uint64_t>(t / per_epoch);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(options.seed, kShuffleStream + epoch));
        rng.shuffle(std::span(order));
      }
      const std::size_t begin = static_cast<std::size_t>(position) * options.batch_size;
      const std::size_t end = std::min(n, begin + options.batch_size);
      rows.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                  order.begin() + static_cast<std::ptrdiff_t>(end));
      const Examples batch = gather(data.train, rows);

      const double loss = objective.loss_and_gradient(state.weights, batch, grad);
      if (!std::isfinite(loss) || loss > options.divergence_threshold) {
        throw DivergenceError("training loss exceeded the divergence threshold");
      }
      const double beta = lr_ratio(schedule, BudgetClock(t, budget));
      optimizer_step(state, grad, beta, optimizer);
      record.iterations.push_back({t, beta, optimizer.base_lr * beta, loss});

      const std::int64_t done = t + 1;
      if (done % eval_every == 0 || done == budget) evaluate(done);
    }
  } catch (const DivergenceError& e) {
    record.diverged = true;
    record.divergence_reason = e.what();
  } catch (const std::invalid_argument& e) {
    // Non-finite gradients surface from the optimizer as invalid input.
    bool finite = true;
    for (double g : grad) finite = finite && std::isfinite(g);
    if (finite) throw;
    record.diverged = true;
    record.divergence_reason = e.what();
  }
  record.final_weights = std::move(state.weights);
  return record;
}

RunRecord train_budgeted(const Network& network, const Dataset& data,
                         const ScheduleSpec& schedule, const OptimizerConfig& optimizer,
                         const TrainOptions& options) {
  return train_budgeted(network, data, network.init_weights(options.seed), schedule, optimizer,
                        options);
}

}  // namespace budgeted
