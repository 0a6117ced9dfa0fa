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

#include "budgeted/network.hpp"
#include "budgeted/rng.hpp"

namespace budgeted {
namespace {

Examples random_batch(int dim, int classes, int n, std::uint64_t seed) {
  Rng rng(seed);
  Examples ex;
  ex.features.resize(dim, n);
  for (int j = 0; j < n; ++j) {
    for (int d = 0; d < dim; ++d) ex.features(d, j) = rng.normal();
    ex.labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
  }
  return ex;
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> central_differences(const Network& net, std::vector<double> w, const Examples& batch,
                                        double h) {
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double keep = w[i];
    w[i] = keep + h;
    const double up = net.loss(w, batch);
    w[i] = keep - h;
    const double down = net.loss(w, batch);
    w[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

TEST(Network, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    Architecture arch;
    arch.input_dim = 1 + static_cast<int>(gen() % 5);
    arch.num_classes = 2 + static_cast<int>(gen() % 4);
    arch.activation = trial % 2 ? Activation::kTanh : Activation::kRelu;
    const int depth = static_cast<int>(gen() % 4);
    const int width = 2 + static_cast<int>(gen() % 8);
    for (int l = 0; l < depth; ++l) {
      arch.hidden.push_back(width);
      arch.skip.push_back(l > 0 && gen() % 2 == 0);
    }
    const Network net(arch);
    const auto w = net.init_weights(static_cast<std::uint64_t>(trial));
    const auto batch = random_batch(arch.input_dim, arch.num_classes, 1 + trial % 7, 100 + trial);
    std::vector<double> analytic(net.num_params());
    net.loss_and_gradient(w, batch, analytic);
    const auto numeric = central_differences(net, w, batch, 1e-6);
    std::vector<double> diff(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) diff[i] = analytic[i] - numeric[i];
    EXPECT_LE(norm(diff), 1e-4 * std::max({norm(analytic), norm(numeric), 1e-8}))
        << describe(arch) << " trial " << trial;
  }
}

TEST(Network, LogisticRegressionGradientClosedForm) {
  Architecture arch;
  arch.input_dim = 3;
  arch.num_classes = 2;
  const Network net(arch);
  ASSERT_EQ(net.num_params(), 4u);
  const std::vector<double> w = {0.5, -0.25, 1.0, 0.1};
  const auto batch = random_batch(3, 2, 9, 4);
  std::vector<double> grad(4);
  net.loss_and_gradient(w, batch, grad);
  std::vector<double> expected(4, 0.0);
  for (int j = 0; j < 9; ++j) {
    double z = w[3];
    for (int d = 0; d < 3; ++d) z += w[static_cast<std::size_t>(d)] * batch.features(d, j);
    const double r = 1.0 / (1.0 + std::exp(-z)) - batch.labels[static_cast<std::size_t>(j)];
    for (int d = 0; d < 3; ++d) expected[static_cast<std::size_t>(d)] += r * batch.features(d, j) / 9;
    expected[3] += r / 9;
  }
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(grad[i], expected[i], 1e-12);
}

TEST(Network, ZeroWeightsGiveUniformLoss) {
  for (int k : {2, 3, 5}) {
    Architecture arch;
    arch.input_dim = 2;
    arch.num_classes = k;
    arch.hidden = {4};
    const Network net(arch);
    const std::vector<double> w(net.num_params(), 0.0);
    EXPECT_NEAR(net.loss(w, random_batch(2, k, 6, 1)), std::log(static_cast<double>(k)), 1e-12);
  }
}

TEST(Network, ParameterCountAndLayout) {
  Architecture arch;
  arch.input_dim = 2;
  arch.num_classes = 3;
  arch.hidden = {3};
  const Network net(arch);
  EXPECT_EQ(net.num_params(), 2u * 3 + 3 + 3 * 3 + 3);
  EXPECT_EQ(net.output_dim(), 3);
  arch.num_classes = 2;
  EXPECT_EQ(Network(arch).output_dim(), 1);
}

TEST(Network, InvalidArchitectures) {
  Architecture arch;
  arch.input_dim = 2;
  arch.num_classes = 2;
  arch.hidden = {4, 8};
  arch.skip = {false, true};
  EXPECT_THROW(validate(arch), std::invalid_argument);
  arch.hidden = {4, 4, 4, 4};
  arch.skip = {};
  EXPECT_THROW(validate(arch), std::invalid_argument);
  arch.hidden = {0};
  EXPECT_THROW(validate(arch), std::invalid_argument);
  arch.hidden = {};
  arch.num_classes = 1;
  EXPECT_THROW(validate(arch), std::invalid_argument);
}

TEST(Network, InitIsSeededAndBounded) {
  Architecture arch;
  arch.input_dim = 16;
  arch.num_classes = 4;
  arch.hidden = {8};
  const Network net(arch);
  EXPECT_EQ(net.init_weights(3), net.init_weights(3));
  EXPECT_NE(net.init_weights(3), net.init_weights(4));
  const auto w = net.init_weights(3);
  for (std::size_t i = 0; i < 16 * 8; ++i) EXPECT_LE(std::abs(w[i]), 0.25);
}

TEST(Network, FullGradientIsMeanOverChunks) {
  Architecture arch;
  arch.input_dim = 3;
  arch.num_classes = 3;
  arch.hidden = {5};
  const Model model = Model::init(arch, 2);
  const auto data = random_batch(3, 3, 2500, 8);
  const auto full = full_gradient(model.network, model.weights, data);
  const auto direct = backward(model, data);
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(full[i], direct[i], 1e-12);
  EXPECT_NEAR(full_gradient_norm(model, data), norm(direct), 1e-12);
}

TEST(Network, AccuracyCountsArgmax) {
  Architecture arch;
  arch.input_dim = 1;
  arch.num_classes = 2;
  const Network net(arch);
  Examples ex;
  ex.features.resize(1, 4);
  ex.features << -2, -1, 1, 2;
  ex.labels = {0, 0, 1, 0};
  EXPECT_DOUBLE_EQ(net.accuracy(std::vector<double>{1.0, 0.0}, ex), 0.75);
}

TEST(QuadraticBowlTest, GradientIsWeights) {
  const QuadraticBowl bowl(3);
  const std::vector<double> w = {1.0, -2.0, 0.5};
  std::vector<double> g(3);
  EXPECT_DOUBLE_EQ(bowl.loss_and_gradient(w, Examples{}, g), 0.5 * (1 + 4 + 0.25));
  EXPECT_EQ(g, w);
}

}  // namespace
}  // namespace budgeted
