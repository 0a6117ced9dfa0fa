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
#include <stdexcept>
#include <string>
#include <vector>

#include "budgeted/data.hpp"

namespace budgeted {

/// Raised when a loss or activation becomes non-finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A differentiable objective over a flat weight vector.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t num_params() const = 0;
  /// Mean loss over `batch`.
  virtual double loss(std::span<const double> weights, const Examples& batch) const = 0;
  /// Mean loss over `batch`; writes its gradient into `grad`.
  virtual double loss_and_gradient(std::span<const double> weights, const Examples& batch,
                                   std::span<double> grad) const = 0;
  /// Fraction of `batch` classified correctly.
  virtual double accuracy(std::span<const double> weights, const Examples& batch) const = 0;
};

enum class Activation { kRelu, kTanh };

std::string_view to_string(Activation activation);
Activation parse_activation(std::string_view name);

/// Logistic regression when `hidden` is empty, otherwise an MLP with up to
/// three hidden layers. `skip[l]` adds an identity shortcut around hidden
/// layer l; its input and output widths must match.
struct Architecture {
  int input_dim = 2;
  int num_classes = 2;
  std::vector<int> hidden;
  Activation activation = Activation::kRelu;
  std::vector<bool> skip;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

void validate(const Architecture& arch);
std::string describe(const Architecture& arch);

/// Weight layout and the loss/gradient math for an Architecture.
class Network final : public Objective {
 public:
  struct Layer {
    std::size_t weight_offset;
    std::size_t bias_offset;
    int in;
    int out;
  };

  explicit Network(Architecture arch);

  const Architecture& architecture() const { return arch_; }
  const std::vector<Layer>& layers() const { return layers_; }
  int output_dim() const { return layers_.back().out; }

  std::size_t num_params() const override { return num_params_; }
  double loss(std::span<const double> weights, const Examples& batch) const override;
  double loss_and_gradient(std::span<const double> weights, const Examples& batch,
                           std::span<double> grad) const override;
  double accuracy(std::span<const double> weights, const Examples& batch) const override;

  /// Output-layer logits, output_dim x batch size.
  Eigen::MatrixXd logits(std::span<const double> weights, const Examples& batch) const;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  std::vector<double> init_weights(std::uint64_t seed) const;

 private:
  double evaluate(std::span<const double> weights, const Examples& batch,
                  std::span<double>* grad) const;

  Architecture arch_;
  std::vector<Layer> layers_;
  std::size_t num_params_ = 0;
};

/// F(w) = 0.5 * |w|^2, independent of the data. A test objective with a
/// closed-form gradient-descent trajectory; accuracy is always 0.
class QuadraticBowl final : public Objective {
 public:
  explicit QuadraticBowl(std::size_t dim) : dim_(dim) {}

  std::size_t num_params() const override { return dim_; }
  double loss(std::span<const double> weights, const Examples& batch) const override;
  double loss_and_gradient(std::span<const double> weights, const Examples& batch,
                           std::span<double> grad) const override;
  double accuracy(std::span<const double>, const Examples&) const override { return 0.0; }

 private:
  std::size_t dim_;
};

struct Model {
  Network network;
  std::vector<double> weights;

  static Model init(const Architecture& arch, std::uint64_t seed);
};

/// Mean cross-entropy (softmax for k > 2 classes, sigmoid for binary).
double forward_loss(const Model& model, const Examples& batch);

/// Exact gradient of `forward_loss` with respect to the flat weights.
std::vector<double> backward(const Model& model, const Examples& batch);

/// Mean gradient of `objective` over all of `data`, in chunks.
std::vector<double> full_gradient(const Objective& objective, std::span<const double> weights,
                                  const Examples& data);

/// Euclidean norm of `full_gradient`. Excludes any weight-decay term.
double full_gradient_norm(const Objective& objective, std::span<const double> weights,
                          const Examples& data);
double full_gradient_norm(const Model& model, const Examples& data);

}  // namespace budgeted
