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

#include "budgeted/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "budgeted/rng.hpp"

namespace budgeted {
namespace {

using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

ConstMatrixMap weight_of(std::span<const double> w, const Network::Layer& layer) {
  return ConstMatrixMap(w.data() + layer.weight_offset, layer.out, layer.in);
}

ConstVectorMap bias_of(std::span<const double> w, const Network::Layer& layer) {
  return ConstVectorMap(w.data() + layer.bias_offset, layer.out);
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation activation) {
  if (activation == Activation::kRelu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

Eigen::MatrixXd activation_slope(const Eigen::MatrixXd& z, Activation activation) {
  if (activation == Activation::kRelu) return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - z.array().tanh().square()).matrix();
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

std::string_view to_string(Activation activation) {
  return activation == Activation::kTanh ? "tanh" : "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("model: unknown activation '" + std::string(name) + "'");
}

void validate(const Architecture& arch) {
  const auto fail = [](const std::string& m) { throw std::invalid_argument("model: " + m); };
  if (arch.input_dim < 1) fail("input_dim must be positive");
  if (arch.num_classes < 2) fail("need at least 2 classes");
  if (arch.hidden.size() > 3) fail("at most 3 hidden layers are supported");
  if (!arch.skip.empty() && arch.skip.size() != arch.hidden.size()) {
    fail("skip flags must match the number of hidden layers");
  }
  int prev = arch.input_dim;
  for (std::size_t l = 0; l < arch.hidden.size(); ++l) {
    if (arch.hidden[l] < 1) fail("hidden widths must be positive");
    if (!arch.skip.empty() && arch.skip[l] && arch.hidden[l] != prev) {
      fail("skip connection around hidden layer " + std::to_string(l + 1) +
           " needs equal input and output widths");
    }
    prev = arch.hidden[l];
  }
}

std::string describe(const Architecture& arch) {
  std::ostringstream out;
  out << "in=" << arch.input_dim << " classes=" << arch.num_classes << " hidden=";
  if (arch.hidden.empty()) out << "none";
  for (std::size_t l = 0; l < arch.hidden.size(); ++l) {
    if (l) out << ',';
    out << arch.hidden[l];
    if (!arch.skip.empty() && arch.skip[l]) out << "+skip";
  }
  out << " act=" << to_string(arch.activation);
  return out.str();
}

Network::Network(Architecture arch) : arch_(std::move(arch)) {
  validate(arch_);
  if (arch_.skip.empty()) arch_.skip.assign(arch_.hidden.size(), false);
  int in = arch_.input_dim;
  std::size_t offset = 0;
  const auto add = [&](int out) {
    Layer layer{offset, offset + static_cast<std::size_t>(out) * static_cast<std::size_t>(in), in, out};
    offset = layer.bias_offset + static_cast<std::size_t>(out);
    layers_.push_back(layer);
    in = out;
  };
  for (int width : arch_.hidden) add(width);
  add(arch_.num_classes == 2 ? 1 : arch_.num_classes);
  num_params_ = offset;
}

Eigen::MatrixXd Network::logits(std::span<const double> weights, const Examples& batch) const {
  if (weights.size() != num_params_) throw std::invalid_argument("model: weight vector size mismatch");
  if (batch.size() == 0) throw std::invalid_argument("model: empty batch");
  if (batch.dim() != arch_.input_dim) {
    throw std::invalid_argument("model: batch has " + std::to_string(batch.dim()) +
                                " features, model expects " + std::to_string(arch_.input_dim));
  }
  Eigen::MatrixXd h = batch.features;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    Eigen::MatrixXd z = weight_of(weights, layers_[l]) * h;
    z.colwise() += bias_of(weights, layers_[l]);
    Eigen::MatrixXd a = activate(z, arch_.activation);
    if (arch_.skip[l]) a += h;
    h = std::move(a);
  }
  Eigen::MatrixXd z = weight_of(weights, layers_.back()) * h;
  z.colwise() += bias_of(weights, layers_.back());
  return z;
}

double Network::evaluate(std::span<const double> weights, const Examples& batch,
                         std::span<double>* grad) const {
  if (weights.size() != num_params_) throw std::invalid_argument("model: weight vector size mismatch");
  if (batch.size() == 0) throw std::invalid_argument("model: empty batch");
  if (batch.dim() != arch_.input_dim) {
    throw std::invalid_argument("model: batch has " + std::to_string(batch.dim()) +
                                " features, model expects " + std::to_string(arch_.input_dim));
  }
  const auto n = static_cast<Eigen::Index>(batch.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t hidden = layers_.size() - 1;

  // inputs[l] feeds layer l; pre[l] is the pre-activation of hidden layer l.
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> pre;
  inputs.reserve(layers_.size());
  pre.reserve(hidden);
  inputs.push_back(batch.features);
  for (std::size_t l = 0; l < hidden; ++l) {
    Eigen::MatrixXd z = weight_of(weights, layers_[l]) * inputs.back();
    z.colwise() += bias_of(weights, layers_[l]);
    Eigen::MatrixXd a = activate(z, arch_.activation);
    if (arch_.skip[l]) a += inputs.back();
    pre.push_back(std::move(z));
    inputs.push_back(std::move(a));
  }
  Eigen::MatrixXd z = weight_of(weights, layers_.back()) * inputs.back();
  z.colwise() += bias_of(weights, layers_.back());
  if (!z.allFinite()) throw DivergenceError("model: non-finite activations");

  double total = 0.0;
  Eigen::MatrixXd dz(z.rows(), n);
  if (z.rows() == 1) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double y = batch.labels[static_cast<std::size_t>(j)] == 1 ? 1.0 : 0.0;
      const double v = z(0, j);
      total += softplus(v) - y * v;
      dz(0, j) = (1.0 / (1.0 + std::exp(-v)) - y) * inv_n;
    }
  } else {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto y = static_cast<Eigen::Index>(batch.labels[static_cast<std::size_t>(j)]);
      if (y < 0 || y >= z.rows()) throw std::invalid_argument("model: label out of range");
      const double top = z.col(j).maxCoeff();
      const Eigen::VectorXd e = (z.col(j).array() - top).exp().matrix();
      const double sum = e.sum();
      total += top + std::log(sum) - z(y, j);
      dz.col(j) = e * (inv_n / sum);
      dz(y, j) -= inv_n;
    }
  }
  const double loss = total * inv_n;
  if (!std::isfinite(loss)) throw DivergenceError("model: non-finite loss");
  if (grad == nullptr) return loss;

  std::span<double> g = *grad;
  if (g.size() != num_params_) throw std::invalid_argument("model: gradient buffer size mismatch");
  const auto write_layer = [&](const Layer& layer, const Eigen::MatrixXd& d, const Eigen::MatrixXd& in) {
    MatrixMap(g.data() + layer.weight_offset, layer.out, layer.in).noalias() = d * in.transpose();
    VectorMap(g.data() + layer.bias_offset, layer.out) = d.rowwise().sum();
  };

  write_layer(layers_.back(), dz, inputs[hidden]);
  if (hidden == 0) return loss;
  // dh: gradient with respect to the output of hidden layer l.
  Eigen::MatrixXd dh = weight_of(weights, layers_.back()).transpose() * dz;
  for (std::size_t l = hidden; l-- > 0;) {
    Eigen::MatrixXd d = dh.cwiseProduct(activation_slope(pre[l], arch_.activation));
    write_layer(layers_[l], d, inputs[l]);
    if (l == 0) break;
    Eigen::MatrixXd below = weight_of(weights, layers_[l]).transpose() * d;
    if (arch_.skip[l]) below += dh;
    dh = std::move(below);
  }
  return loss;
}

double Network::loss(std::span<const double> weights, const Examples& batch) const {
  return evaluate(weights, batch, nullptr);
}

double Network::loss_and_gradient(std::span<const double> weights, const Examples& batch,
                                  std::span<double> grad) const {
  return evaluate(weights, batch, &grad);
}

double Network::accuracy(std::span<const double> weights, const Examples& batch) const {
  const Eigen::MatrixXd z = logits(weights, batch);
  std::size_t correct = 0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    int predicted = 0;
    if (z.rows() == 1) {
      predicted = z(0, j) > 0.0 ? 1 : 0;
    } else {
      Eigen::Index arg = 0;
      z.col(j).maxCoeff(&arg);
      predicted = static_cast<int>(arg);
    }
    if (predicted == batch.labels[static_cast<std::size_t>(j)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(z.cols());
}

std::vector<double> Network::init_weights(std::uint64_t seed) const {
  std::vector<double> w(num_params_);
  Rng rng(derive_seed(seed, 3));
  for (const Layer& layer : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    const std::size_t end = layer.bias_offset + static_cast<std::size_t>(layer.out);
    for (std::size_t i = layer.weight_offset; i < end; ++i) w[i] = rng.uniform(-bound, bound);
  }
  return w;
}

double QuadraticBowl::loss(std::span<const double> weights, const Examples&) const {
  double sum = 0.0;
  for (double w : weights) sum += w * w;
  return 0.5 * sum;
}

double QuadraticBowl::loss_and_gradient(std::span<const double> weights, const Examples& batch,
                                        std::span<double> grad) const {
  if (grad.size() != weights.size()) throw std::invalid_argument("bowl: gradient size mismatch");
  std::copy(weights.begin(), weights.end(), grad.begin());
  return loss(weights, batch);
}

Model Model::init(const Architecture& arch, std::uint64_t seed) {
  Network network(arch);
  auto weights = network.init_weights(seed);
  return Model{std::move(network), std::move(weights)};
}

double forward_loss(const Model& model, const Examples& batch) {
  return model.network.loss(model.weights, batch);
}

std::vector<double> backward(const Model& model, const Examples& batch) {
  std::vector<double> grad(model.network.num_params());
  model.network.loss_and_gradient(model.weights, batch, grad);
  return grad;
}

std::vector<double> full_gradient(const Objective& objective, std::span<const double> weights,
                                  const Examples& data) {
  constexpr std::size_t kChunk = 1024;
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("full_gradient: empty dataset");
  std::vector<double> total(objective.num_params(), 0.0);
  std::vector<double> part(objective.num_params());
  std::vector<std::size_t> columns;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t count = std::min(kChunk, n - start);
    columns.resize(count);
    for (std::size_t j = 0; j < count; ++j) columns[j] = start + j;
    const Examples chunk = count == n ? data : gather(data, columns);
    objective.loss_and_gradient(weights, chunk, part);
    const double weight = static_cast<double>(count) / static_cast<double>(n);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += weight * part[i];
  }
  return total;
}

double full_gradient_norm(const Objective& objective, std::span<const double> weights,
                          const Examples& data) {
  const auto g = full_gradient(objective, weights, data);
  double sum = 0.0;
  for (double v : g) sum += v * v;
  return std::sqrt(sum);
}

double full_gradient_norm(const Model& model, const Examples& data) {
  return full_gradient_norm(model.network, model.weights, data);
}

}  // namespace budgeted
