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
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "budgeted/experiment.hpp"
#include "budgeted/persistence.hpp"
#include "budgeted/text_format.hpp"

namespace {

// Flag values win over the environment; only --out and --jobs have one.
void apply_environment(budgeted::CommandOptions& options) {
  if (!options.out) {
    if (const char* out = std::getenv("BUDGETED_OUT"); out && *out) options.out = out;
  }
  if (!options.jobs) {
    if (const char* jobs = std::getenv("BUDGETED_JOBS"); jobs && *jobs) {
      const long long n = budgeted::parse_int(jobs, "BUDGETED_JOBS");
      if (n < 1) throw std::invalid_argument("BUDGETED_JOBS: must be at least 1");
      options.jobs = static_cast<unsigned>(n);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budgeted training: learning-rate schedules under a fixed iteration budget"};
  app.require_subcommand(1);

  budgeted::CommandOptions options;
  std::string out;
  std::uint64_t seed = 0;
  unsigned jobs = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (env BUDGETED_OUT)");
    sub->add_option("--seed", seed, "Run a single seed instead of the configured ones");
    sub->add_option("--jobs", jobs, "Parallel runs (env BUDGETED_JOBS)")->check(CLI::PositiveNumber);
    sub->add_flag("--overwrite", options.overwrite, "Replace existing results");
  };

  auto* run = app.add_subcommand("run", "Train one configuration and persist its record");
  auto* sweep = app.add_subcommand("sweep", "Grid over schedules x budgets x seeds");
  auto* rank = app.add_subcommand("rank", "Rank-prediction experiment over a random architecture family");
  auto* compare = app.add_subcommand("subsample-compare",
                                     "Iteration-limited full data vs offline subsampling");
  for (auto* sub : {run, sweep, rank, compare}) add_common(sub);

  auto* schedule = app.add_subcommand("schedule", "Print a schedule curve as progress,ratio CSV");
  std::string kind;
  std::vector<std::string> params;
  std::size_t points = 11;
  schedule->add_option("kind", kind, "Schedule kind, e.g. linear, step, cosine")->required();
  schedule->add_option("params", params, "key=value parameters, e.g. drops=0.5,0.75");
  schedule->add_option("--points", points, "Number of samples (>= 2)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (schedule->parsed()) return budgeted::cmd_schedule(kind, params, points, std::cout);
    auto* active = app.get_subcommands().front();
    if (active->count("--out")) options.out = out;
    if (active->count("--seed")) options.seed = seed;
    if (active->count("--jobs")) options.jobs = jobs;
    apply_environment(options);
    if (run->parsed()) return budgeted::cmd_run(options, std::cout);
    if (sweep->parsed()) return budgeted::cmd_sweep(options, std::cout);
    if (rank->parsed()) return budgeted::cmd_rank(options, std::cout);
    return budgeted::cmd_subsample_compare(options, std::cout);
  } catch (const budgeted::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const budgeted::OutputExistsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
