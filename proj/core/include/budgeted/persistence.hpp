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

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "budgeted/diagnostics.hpp"
#include "budgeted/run_config.hpp"
#include "budgeted/train.hpp"

namespace budgeted {

/// Output directory already holds results and overwriting was not requested.
class OutputExistsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

inline constexpr std::string_view kIterationsHeader = "iter,beta,lr,train_loss";
inline constexpr std::string_view kEpochsHeader = "epoch,val_acc,full_grad_norm,weight_norm";
inline constexpr std::string_view kEquivalentLrHeader = "epoch,equivalent_lr";

std::string iterations_csv(const RunRecord& run);
std::string epochs_csv(const RunRecord& run);
/// Only meaningful for AMSGrad runs.
std::string equivalent_lr_csv(const RunRecord& run);

/// Numeric CSV with a header line. "nan"/"inf" cells are accepted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

/// Human-readable manifest: resolved config, seed, schedule, budget,
/// dataset fingerprint and headline results.
std::string manifest_json(const RunConfig& config, std::uint64_t seed, const RunRecord& run,
                          const ConvergenceReport& report);

/// Fails with OutputExistsError when `dir` exists and is not empty, unless
/// `overwrite` is set. Creates the directory.
void prepare_output_dir(const std::filesystem::path& dir, bool overwrite);

/// Writes manifest.json, iterations.csv, epochs.csv, report.txt, report.csv
/// (and equivalent_lr.csv for AMSGrad) into `dir`.
void write_run(const std::filesystem::path& dir, const RunConfig& config, std::uint64_t seed,
               const RunRecord& run);

}  // namespace budgeted
