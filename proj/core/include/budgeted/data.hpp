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

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace budgeted {

/// Column-per-example block: features is D x n.
struct Examples {
  Eigen::MatrixXd features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  Eigen::Index dim() const { return features.rows(); }
};

Examples gather(const Examples& source, std::span<const std::size_t> columns);

/// Immutable labelled dataset with disjoint train/validation splits.
struct Dataset {
  int num_classes = 2;
  Examples train;
  Examples val;
  /// Source row ids of each split, for provenance and overlap checks.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> val_rows;
  std::uint64_t fingerprint = 0;

  Eigen::Index dim() const { return train.dim(); }
};

/// 64-bit FNV-1a over the canonical byte serialization.
std::uint64_t compute_fingerprint(const Dataset& data);

enum class GeneratorKind { kBlobs, kSpirals, kLinear };

std::string_view to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(std::string_view name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::kBlobs;
  std::size_t samples = 1000;
  int classes = 2;
  int dim = 2;
  /// Blobs: scale of the class centers relative to unit within-cluster noise.
  double separation = 3.0;
  /// Blobs: Gaussian clusters per class; more than one makes the task non-linear.
  int clusters_per_class = 1;
  /// Spirals: positional noise; number of turns.
  double noise = 0.1;
  double turns = 1.5;
  /// Linear: minimum distance from the separating hyperplane.
  double margin = 0.1;
  /// Fraction of examples held out for validation.
  double holdout = 0.1;

  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

void validate(const GeneratorSpec& spec);

/// Deterministic for (spec, seed). Features are standardized with
/// train-split statistics.
Dataset make_synthetic(const GeneratorSpec& spec, std::uint64_t seed);

/// Uniform subset of the training split without replacement; validation
/// split is kept as is.
Dataset subsample(const Dataset& data, double fraction, std::uint64_t seed);

/// Moves a random `fraction` of the training split to validation.
Dataset holdout_split(const Dataset& data, double fraction, std::uint64_t seed);

/// Zero mean, unit variance per dimension using train-split statistics.
void standardize(Dataset& data);

/// Reads `label,feature1,...` rows after a header line into the training
/// split. Errors carry line numbers.
Dataset load_csv(const std::filesystem::path& path);

/// Writes train rows then validation rows in the `load_csv` layout.
void write_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace budgeted
