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

#include "budgeted/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "budgeted/rng.hpp"
#include "budgeted/text_format.hpp"

namespace budgeted {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

struct Fnv1a {
  std::uint64_t state = kFnvOffset;

  void bytes(std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      state ^= (word >> (8 * i)) & 0xffU;
      state *= kFnvPrime;
    }
  }
  void value(double x) { bytes(std::bit_cast<std::uint64_t>(x)); }
  void value(std::int64_t x) { bytes(static_cast<std::uint64_t>(x)); }
};

void hash_examples(Fnv1a& h, const Examples& ex) {
  h.value(static_cast<std::int64_t>(ex.size()));
  for (std::size_t j = 0; j < ex.size(); ++j) {
    h.value(static_cast<std::int64_t>(ex.labels[j]));
    for (Eigen::Index d = 0; d < ex.features.rows(); ++d) {
      h.value(ex.features(d, static_cast<Eigen::Index>(j)));
    }
  }
}

/// Splits examples 0..n-1 into train/val by a seeded permutation.
Dataset split_examples(Examples all, int classes, double holdout, std::uint64_t seed) {
  const std::size_t n = all.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(order));

  auto n_val = static_cast<std::size_t>(std::llround(holdout * static_cast<double>(n)));
  n_val = std::min(n_val, n - 1);

  Dataset data;
  data.num_classes = classes;
  data.val_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  data.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(data.val_rows.begin(), data.val_rows.end());
  std::sort(data.train_rows.begin(), data.train_rows.end());
  data.train = gather(all, data.train_rows);
  data.val = gather(all, data.val_rows);
  return data;
}

Examples make_blobs(const GeneratorSpec& spec, Rng& rng) {
  const int clusters = spec.classes * spec.clusters_per_class;
  Eigen::MatrixXd centers(spec.dim, clusters);
  for (int c = 0; c < clusters; ++c) {
    for (int d = 0; d < spec.dim; ++d) centers(d, c) = spec.separation * rng.normal();
  }
  Examples ex;
  ex.features.resize(spec.dim, static_cast<Eigen::Index>(spec.samples));
  ex.labels.resize(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(spec.classes));
    const int cluster = label * spec.clusters_per_class +
                        static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.clusters_per_class)));
    ex.labels[i] = label;
    for (int d = 0; d < spec.dim; ++d) {
      ex.features(d, static_cast<Eigen::Index>(i)) = centers(d, cluster) + rng.normal();
    }
  }
  return ex;
}

Examples make_spirals(const GeneratorSpec& spec, Rng& rng) {
  Examples ex;
  ex.features.resize(2, static_cast<Eigen::Index>(spec.samples));
  ex.labels.resize(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const int label = static_cast<int>(i % 2);
    const double r = rng.uniform(0.05, 1.0);
    const double angle = 2.0 * std::numbers::pi * spec.turns * r + std::numbers::pi * label;
    ex.labels[i] = label;
    ex.features(0, static_cast<Eigen::Index>(i)) = r * std::cos(angle) + spec.noise * rng.normal();
    ex.features(1, static_cast<Eigen::Index>(i)) = r * std::sin(angle) + spec.noise * rng.normal();
  }
  return ex;
}

Examples make_linear(const GeneratorSpec& spec, Rng& rng) {
  Eigen::VectorXd normal(spec.dim);
  for (int d = 0; d < spec.dim; ++d) normal(d) = rng.normal();
  normal.normalize();
  Examples ex;
  ex.features.resize(spec.dim, static_cast<Eigen::Index>(spec.samples));
  ex.labels.resize(spec.samples);
  Eigen::VectorXd x(spec.dim);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    double side = 0.0;
    do {
      for (int d = 0; d < spec.dim; ++d) x(d) = rng.uniform(-1.0, 1.0);
      side = normal.dot(x);
    } while (std::abs(side) < spec.margin);
    ex.features.col(static_cast<Eigen::Index>(i)) = x;
    ex.labels[i] = side > 0.0 ? 1 : 0;
  }
  return ex;
}

[[noreturn]] void csv_error(const std::filesystem::path& path, std::size_t line,
                            const std::string& message) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + message);
}

}  // namespace

Examples gather(const Examples& source, std::span<const std::size_t> columns) {
  Examples out;
  out.features.resize(source.features.rows(), static_cast<Eigen::Index>(columns.size()));
  out.labels.resize(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(columns[j]);
    out.features.col(static_cast<Eigen::Index>(j)) = source.features.col(c);
    out.labels[j] = source.labels[columns[j]];
  }
  return out;
}

std::uint64_t compute_fingerprint(const Dataset& data) {
  Fnv1a h;
  h.value(static_cast<std::int64_t>(data.num_classes));
  h.value(static_cast<std::int64_t>(data.dim()));
  hash_examples(h, data.train);
  hash_examples(h, data.val);
  return h.state;
}

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kBlobs:
      return "blobs";
    case GeneratorKind::kSpirals:
      return "spirals";
    case GeneratorKind::kLinear:
      return "linear";
  }
  return "unknown";
}

GeneratorKind parse_generator_kind(std::string_view name) {
  if (name == "blobs") return GeneratorKind::kBlobs;
  if (name == "spirals") return GeneratorKind::kSpirals;
  if (name == "linear") return GeneratorKind::kLinear;
  throw std::invalid_argument("dataset: unknown generator '" + std::string(name) + "'");
}

void validate(const GeneratorSpec& spec) {
  const auto fail = [](const std::string& m) { throw std::invalid_argument("dataset: " + m); };
  if (spec.samples < 2) fail("samples must be at least 2");
  if (!(spec.holdout >= 0.0 && spec.holdout < 1.0)) fail("holdout must lie in [0, 1)");
  switch (spec.kind) {
    case GeneratorKind::kBlobs:
      if (spec.classes < 2) fail("blobs need at least 2 classes");
      if (!(spec.separation > 0.0)) fail("blobs separation must be positive");
      if (spec.dim < 1) fail("dim must be at least 1");
      if (spec.clusters_per_class < 1) fail("clusters_per_class must be at least 1");
      break;
    case GeneratorKind::kSpirals:
      if (!(spec.noise >= 0.0)) fail("spirals noise must be non-negative");
      if (!(spec.turns > 0.0)) fail("spirals turns must be positive");
      break;
    case GeneratorKind::kLinear:
      if (spec.dim < 1) fail("dim must be at least 1");
      if (!(spec.margin >= 0.0 && spec.margin < 0.5)) fail("linear margin must lie in [0, 0.5)");
      break;
  }
}

Dataset make_synthetic(const GeneratorSpec& spec, std::uint64_t seed) {
  validate(spec);
  Rng rng(derive_seed(seed, 0));
  Examples all;
  int classes = 2;
  switch (spec.kind) {
    case GeneratorKind::kBlobs:
      all = make_blobs(spec, rng);
      classes = spec.classes;
      break;
    case GeneratorKind::kSpirals:
      all = make_spirals(spec, rng);
      break;
    case GeneratorKind::kLinear:
      all = make_linear(spec, rng);
      break;
  }
  Dataset data = split_examples(std::move(all), classes, spec.holdout, derive_seed(seed, 1));
  standardize(data);
  data.fingerprint = compute_fingerprint(data);
  return data;
}

Dataset subsample(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("subsample: fraction must lie in (0, 1]");
  }
  const std::size_t n = data.train.size();
  const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (keep < 1) throw std::invalid_argument("subsample: result would be empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 2));
  rng.shuffle(std::span(order));
  order.resize(keep);
  std::sort(order.begin(), order.end());

  Dataset out;
  out.num_classes = data.num_classes;
  out.train = gather(data.train, order);
  out.val = data.val;
  out.val_rows = data.val_rows;
  out.train_rows.reserve(keep);
  for (auto i : order) out.train_rows.push_back(data.train_rows[i]);
  out.fingerprint = compute_fingerprint(out);
  return out;
}

Dataset holdout_split(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("holdout: fraction must lie in [0, 1)");
  }
  if (data.train.size() < 2 && fraction > 0.0) {
    throw std::invalid_argument("holdout: need at least 2 training examples");
  }
  Dataset out = split_examples(data.train, data.num_classes, fraction, seed);
  // Map split-local ids back to the source row ids.
  for (auto& r : out.train_rows) r = data.train_rows[r];
  for (auto& r : out.val_rows) r = data.train_rows[r];
  if (data.val.size() > 0) {
    const auto n_old = data.val.size();
    const auto n_new = out.val.size();
    Examples merged;
    merged.features.resize(data.dim(), static_cast<Eigen::Index>(n_old + n_new));
    merged.features << data.val.features, out.val.features;
    merged.labels = data.val.labels;
    merged.labels.insert(merged.labels.end(), out.val.labels.begin(), out.val.labels.end());
    out.val = std::move(merged);
    out.val_rows.insert(out.val_rows.begin(), data.val_rows.begin(), data.val_rows.end());
  }
  out.fingerprint = compute_fingerprint(out);
  return out;
}

void standardize(Dataset& data) {
  const auto n = static_cast<double>(data.train.size());
  if (n < 1) return;
  const Eigen::VectorXd mean = data.train.features.rowwise().mean();
  Eigen::VectorXd scale =
      ((data.train.features.colwise() - mean).array().square().rowwise().sum() / n)
          .sqrt()
          .matrix();
  for (Eigen::Index d = 0; d < scale.size(); ++d) {
    if (!(scale(d) > 1e-12)) scale(d) = 1.0;
  }
  const Eigen::VectorXd inv = scale.cwiseInverse();
  data.train.features = (data.train.features.colwise() - mean).array().colwise() * inv.array();
  if (data.val.size() > 0) {
    data.val.features = (data.val.features.colwise() - mean).array().colwise() * inv.array();
  }
  data.fingerprint = compute_fingerprint(data);
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open dataset file");

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) csv_error(path, 1, "missing header line");
  ++line_no;
  const auto header = split(trim(line), ',');
  if (header.size() < 2) csv_error(path, line_no, "header needs a label and at least one feature");
  const std::size_t dim = header.size() - 1;

  std::vector<int> labels;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    const auto cells = split(row, ',');
    if (cells.size() != dim + 1) {
      csv_error(path, line_no, "expected " + std::to_string(dim + 1) + " fields, got " +
                                   std::to_string(cells.size()));
    }
    long long label = 0;
    try {
      label = parse_int(cells[0], "label");
    } catch (const std::invalid_argument& e) {
      csv_error(path, line_no, e.what());
    }
    if (label < 0 || label > 1'000'000) {
      csv_error(path, line_no, "label out of range: " + std::to_string(label));
    }
    labels.push_back(static_cast<int>(label));
    for (std::size_t d = 1; d <= dim; ++d) {
      double v = 0.0;
      try {
        v = parse_double(cells[d], "feature");
      } catch (const std::invalid_argument& e) {
        csv_error(path, line_no, e.what());
      }
      if (!std::isfinite(v)) csv_error(path, line_no, "non-finite feature value");
      values.push_back(v);
    }
  }
  if (labels.empty()) throw std::runtime_error(path.string() + ": empty dataset");

  Dataset data;
  const int max_label = *std::max_element(labels.begin(), labels.end());
  data.num_classes = std::max(2, max_label + 1);
  data.train.features = Eigen::Map<const Eigen::MatrixXd>(
      values.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(labels.size()));
  data.train.labels = std::move(labels);
  data.train_rows.resize(data.train.size());
  std::iota(data.train_rows.begin(), data.train_rows.end(), std::size_t{0});
  data.val.features.resize(static_cast<Eigen::Index>(dim), 0);
  data.fingerprint = compute_fingerprint(data);
  return data;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write dataset file");
  out << "label";
  for (Eigen::Index d = 0; d < data.dim(); ++d) out << ",f" << (d + 1);
  out << '\n';
  for (const Examples* split_ptr : {&data.train, &data.val}) {
    const Examples& ex = *split_ptr;
    for (std::size_t j = 0; j < ex.size(); ++j) {
      out << ex.labels[j];
      for (Eigen::Index d = 0; d < ex.features.rows(); ++d) {
        out << ',' << format_double(ex.features(d, static_cast<Eigen::Index>(j)));
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace budgeted
