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
#include "budgeted/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>

#include "budgeted/diagnostics.hpp"
#include "budgeted/parallel.hpp"
#include "budgeted/persistence.hpp"
#include "budgeted/rng.hpp"
#include "budgeted/text_format.hpp"
#include "json.hpp"

namespace budgeted {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSubsetStream = 0x7375627365740000ULL;

std::uint64_t hash_text(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string safe_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '-' || c == '_' || c == '.';
    out += keep ? c : '_';
  }
  return out;
}

double median_or_nan(std::vector<double> v) {
  return v.empty() ? std::nan("") : median(std::move(v));
}

std::string budget_header(std::string_view first, const std::vector<double>& budgets) {
  std::string out(first);
  for (double b : budgets) out += ',' + format_double(b);
  return out + '\n';
}

TrainOptions train_options(const RunConfig& config, std::int64_t budget_iters, std::uint64_t seed) {
  TrainOptions o;
  o.budget_iters = budget_iters;
  o.batch_size = config.batch_size;
  o.seed = seed;
  o.eval_every = config.eval_every;
  o.divergence_threshold = config.divergence_threshold;
  o.sgd_reference_lr = config.reference_lr;
  return o;
}

RunRecord train_with(const RunConfig& config, const ScheduleConfig& schedule, std::int64_t budget_iters,
                     std::uint64_t seed, const Dataset& data) {
  const std::int64_t ipe = iterations_per_epoch(data.train.size(), config.batch_size);
  const ScheduleSpec aware = resolve_schedule(schedule, config.full_budget_epochs, budget_iters, ipe);
  const Network network(build_architecture(config.model, data));
  return train_budgeted(network, data, aware, config.optimizer, train_options(config, budget_iters, seed));
}

RunConfig cell_config(const RunConfig& base, const ScheduleConfig& schedule, double budget,
                      std::uint64_t seed) {
  RunConfig c = base;
  c.schedule = schedule;
  c.budget = BudgetConfig{budget, std::nullopt};
  c.seeds = {seed};
  c.sweep.reset();
  c.rank.reset();
  c.subsample.reset();
  return c;
}

}  // namespace

RunConfig load_for_command(const CommandOptions& options) {
  RunConfig config = load_run_config(options.config_path);
  if (options.out) config.output = *options.out;
  if (options.seed) config.seeds = {*options.seed};
  return config;
}

RunRecord execute_run(const RunConfig& config, const ScheduleConfig& schedule,
                      const BudgetConfig& budget, std::uint64_t seed, const Dataset& data) {
  const std::int64_t ipe = iterations_per_epoch(data.train.size(), config.batch_size);
  return train_with(config, schedule, resolve_budget(config, budget, ipe), seed, data);
}

RunRecord execute_run(const RunConfig& config, std::uint64_t seed) {
  return execute_run(config, config.schedule, config.budget, seed, build_dataset(config.dataset, seed));
}

SweepResult run_sweep(const RunConfig& config, const fs::path& out, unsigned jobs, bool overwrite) {
  if (!config.sweep) throw ConfigError("sweep", "missing sweep section");
  const SweepConfig& grid = *config.sweep;
  SweepResult result;
  for (const auto& s : grid.schedules) result.schedules.push_back(s.name);
  result.budgets = grid.budgets;
  for (const auto& s : grid.schedules) {
    for (double b : grid.budgets) {
      for (std::uint64_t seed : config.seeds) {
        SweepCell cell;
        cell.schedule = s.name;
        cell.budget = b;
        cell.seed = seed;
        result.cells.push_back(cell);
      }
    }
  }
  const bool persist = !out.empty();
  if (persist) fs::create_directories(out / "cells");
  const std::size_t per_schedule = grid.budgets.size() * config.seeds.size();

  std::mutex data_mutex;
  std::map<std::uint64_t, std::shared_ptr<const Dataset>> datasets;
  auto dataset_for = [&](std::uint64_t seed) {
    std::lock_guard lock(data_mutex);
    auto& slot = datasets[seed];
    if (!slot) slot = std::make_shared<const Dataset>(build_dataset(config.dataset, seed));
    return slot;
  };

  parallel_for(result.cells.size(), jobs, [&](std::size_t i) {
    SweepCell& cell = result.cells[i];
    const ScheduleConfig& schedule = grid.schedules[i / per_schedule];
    const RunConfig single = cell_config(config, schedule, cell.budget, cell.seed);
    const std::string hash = std::to_string(hash_text(to_json(single)));
    const fs::path dir = out / "cells" / safe_name(cell.schedule) /
                         ("b" + format_double(cell.budget)) / ("s" + std::to_string(cell.seed));
    const fs::path result_path = dir / "result.json";
    if (persist && fs::exists(result_path)) {
      const json prev = json::parse(read_file(result_path));
      if (prev.value("config_hash", "") != hash && !overwrite) {
        throw OutputExistsError("sweep cell " + dir.string() +
                                " was produced by a different config; pass --overwrite");
      }
      if (prev.value("config_hash", "") == hash && prev.value("status", "") == "ok" && !overwrite) {
        cell.ok = true;
        cell.resumed = true;
        cell.best_val_acc = prev.at("best_val_acc").get<double>();
        cell.best_progress = prev.at("best_progress").get<double>();
        cell.final_grad_norm = prev.at("final_grad_norm").get<double>();
        cell.diverged = prev.at("diverged").get<bool>();
        return;
      }
    }
    json res;
    res["config_hash"] = hash;
    try {
      const auto data = dataset_for(cell.seed);
      const RunRecord run = execute_run(single, single.schedule, single.budget, cell.seed, *data);
      if (run.evals.empty()) throw std::runtime_error("run produced no evaluations");
      const ConvergenceReport report = convergence_report(run);
      cell.ok = true;
      cell.best_val_acc = run.best_val_acc();
      cell.best_progress = report.best_progress;
      cell.final_grad_norm = report.final_grad_norm;
      cell.diverged = run.diverged;
      if (persist) write_run(dir, single, cell.seed, run);
      res["status"] = "ok";
      res["best_val_acc"] = cell.best_val_acc;
      res["best_progress"] = cell.best_progress;
      res["final_grad_norm"] = std::isfinite(cell.final_grad_norm) ? json(cell.final_grad_norm) : json(0.0);
      res["diverged"] = cell.diverged;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
      res["status"] = "failed";
      res["error"] = cell.error;
    }
    if (persist) {
      fs::create_directories(dir);
      write_file_atomic(result_path, res.dump(2) + "\n");
    }
  });

  const std::size_t n_seeds = config.seeds.size();
  for (std::size_t s = 0; s < result.schedules.size(); ++s) {
    for (std::size_t b = 0; b < result.budgets.size(); ++b) {
      std::vector<double> accs;
      for (std::size_t k = 0; k < n_seeds; ++k) {
        const SweepCell& c = result.cells[(s * result.budgets.size() + b) * n_seeds + k];
        if (c.ok) accs.push_back(c.best_val_acc);
      }
      result.medians.push_back(median_or_nan(std::move(accs)));
    }
  }

  if (persist) {
    std::string summary = budget_header("schedule", result.budgets);
    for (std::size_t s = 0; s < result.schedules.size(); ++s) {
      summary += result.schedules[s];
      for (std::size_t b = 0; b < result.budgets.size(); ++b) summary += ',' + format_double(result.median(s, b));
      summary += '\n';
    }
    write_file_atomic(out / "summary.csv", summary);
    std::string cells = "schedule,budget,seed,status,best_val_acc,best_progress,final_grad_norm,diverged\n";
    for (const auto& c : result.cells) {
      cells += c.schedule + ',' + format_double(c.budget) + ',' + std::to_string(c.seed) + ',' +
               (c.ok ? "ok" : "failed") + ',' + format_double(c.ok ? c.best_val_acc : std::nan("")) + ',' +
               format_double(c.ok ? c.best_progress : std::nan("")) + ',' +
               format_double(c.ok ? c.final_grad_norm : std::nan("")) + ',' + (c.diverged ? "1" : "0") + '\n';
    }
    write_file_atomic(out / "cells.csv", cells);
  }
  return result;
}

RankSummary run_rank(const RunConfig& config, const fs::path& out, unsigned jobs, bool overwrite) {
  if (!config.rank) throw ConfigError("rank", "missing rank section");
  const RankConfig& rc = *config.rank;
  if (!out.empty()) prepare_output_dir(out, overwrite);
  RankSummary summary;
  for (const auto& s : rc.schedules) summary.schedules.push_back(s.name);
  summary.budgets = rc.budgets;
  summary.seeds = config.seeds;
  std::vector<NamedSchedule> named;
  for (const auto& s : rc.schedules) named.push_back({s.name, s.spec, s.conversion});

  std::string detail = "seed,arch,description,schedule,budget,accuracy,full_accuracy\n";
  std::string accuracy = "seed,schedule,budget,raw_mean,normalized_mean\n";
  std::string by_seed = "seed,schedule,budget,tau\n";
  std::string family_csv = "seed,arch,description,excluded\n";
  for (std::uint64_t seed : config.seeds) {
    const Dataset data = build_dataset(config.dataset, seed);
    const ArchitectureFamily family =
        gen_architectures(rc.family_size, seed, static_cast<int>(data.dim()), data.num_classes);
    RankTask task;
    task.data = &data;
    task.optimizer = config.optimizer;
    task.batch_size = config.batch_size;
    task.full_budget_epochs = static_cast<std::int64_t>(std::llround(config.full_budget_epochs));
    task.reference = rc.reference;
    task.jobs = jobs;
    const std::uint64_t run_seeds[] = {seed};
    RankTable table = rank_experiment(family, named, rc.budgets, task, run_seeds);
    const std::string sd = std::to_string(seed);
    for (std::size_t a = 0; a < family.members.size(); ++a) {
      const bool excluded = std::find(table.excluded.begin(), table.excluded.end(), a) != table.excluded.end();
      family_csv += sd + ',' + std::to_string(a) + ",\"" + describe(family.members[a]) + "\"," +
                    (excluded ? "1" : "0") + '\n';
    }
    for (const auto& cell : table.cells) {
      by_seed += sd + ',' + cell.schedule + ',' + format_double(cell.budget) + ',' +
                 (cell.tau ? format_double(*cell.tau) : "nan") + '\n';
      for (std::size_t a = 0; a < cell.accuracy.size(); ++a) {
        detail += sd + ',' + std::to_string(a) + ",\"" + describe(family.members[a]) + "\"," + cell.schedule +
                  ',' + format_double(cell.budget) + ',' + format_double(cell.accuracy[a]) + ',' +
                  format_double(table.full_accuracy[a]) + '\n';
      }
    }
    for (const auto& a : budgeted_accuracy_table(table)) {
      accuracy += sd + ',' + a.schedule + ',' + format_double(a.budget) + ',' + format_double(a.raw_mean) +
                  ',' + format_double(a.normalized_mean) + '\n';
    }
    summary.tables.push_back(std::move(table));
  }
  for (std::size_t s = 0; s < summary.schedules.size(); ++s) {
    for (std::size_t b = 0; b < summary.budgets.size(); ++b) {
      std::vector<double> taus;
      for (const auto& t : summary.tables) {
        if (const auto& tau = t.cell(s, b).tau) taus.push_back(*tau);
      }
      summary.median_tau.push_back(taus.empty() ? std::nullopt : std::optional<double>(median(taus)));
    }
  }
  if (!out.empty()) {
    std::string tau = budget_header("schedule", summary.budgets);
    for (std::size_t s = 0; s < summary.schedules.size(); ++s) {
      tau += summary.schedules[s];
      for (std::size_t b = 0; b < summary.budgets.size(); ++b) {
        const auto t = summary.tau(s, b);
        tau += ',' + (t ? format_double(*t) : std::string("nan"));
      }
      tau += '\n';
    }
    write_file_atomic(out / "tau.csv", tau);
    write_file_atomic(out / "tau_by_seed.csv", by_seed);
    write_file_atomic(out / "accuracy.csv", accuracy);
    write_file_atomic(out / "detail.csv", detail);
    write_file_atomic(out / "family.csv", family_csv);
    write_file_atomic(out / "config.json", to_json(config));
  }
  return summary;
}

std::vector<SubsampleRow> run_subsample_compare(const RunConfig& config, const fs::path& out,
                                                unsigned jobs, bool overwrite) {
  if (!config.subsample) throw ConfigError("subsample", "missing subsample section");
  if (!out.empty()) prepare_output_dir(out, overwrite);
  const auto& budgets = config.subsample->budgets;
  const auto& seeds = config.seeds;
  std::vector<Dataset> datasets;
  for (std::uint64_t seed : seeds) datasets.push_back(build_dataset(config.dataset, seed));

  ScheduleConfig full_schedule = config.schedule;
  full_schedule.conversion = Conversion::kBac;
  // Replaying over the subset's own full epoch count is BAC at the full budget.
  const ScheduleConfig& subset_schedule = full_schedule;

  struct Job {
    std::size_t budget, seed;
    bool subset;
    double acc = 0.0;
    std::int64_t iters = 0;
  };
  std::vector<Job> work;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      work.push_back({b, s, false});
      work.push_back({b, s, true});
    }
  }
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    Job& job = work[i];
    const std::uint64_t seed = seeds[job.seed];
    const Dataset& data = datasets[job.seed];
    RunRecord run;
    if (!job.subset) {
      run = execute_run(config, full_schedule, BudgetConfig{budgets[job.budget], std::nullopt}, seed, data);
    } else {
      const Dataset small = subsample(data, budgets[job.budget], derive_seed(seed, kSubsetStream));
      run = execute_run(config, subset_schedule, BudgetConfig{1.0, std::nullopt}, seed, small);
    }
    job.acc = run.best_val_acc();
    job.iters = run.meta.budget;
  });

  std::vector<SubsampleRow> rows;
  std::string runs = "budget,seed,setting,iters,best_val_acc\n";
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    std::vector<double> full, sub;
    for (const auto& job : work) {
      if (job.budget != b) continue;
      (job.subset ? sub : full).push_back(job.acc);
      runs += format_double(budgets[b]) + ',' + std::to_string(seeds[job.seed]) + ',' +
              (job.subset ? "subset" : "full") + ',' + std::to_string(job.iters) + ',' +
              format_double(job.acc) + '\n';
    }
    rows.push_back({budgets[b], median(full), median(sub)});
  }
  if (!out.empty()) {
    std::string compare = "budget,full_acc,subset_acc\n";
    for (const auto& r : rows) {
      compare += format_double(r.budget) + ',' + format_double(r.full_acc) + ',' + format_double(r.subset_acc) + '\n';
    }
    write_file_atomic(out / "compare.csv", compare);
    write_file_atomic(out / "runs.csv", runs);
    write_file_atomic(out / "config.json", to_json(config));
  }
  return rows;
}

std::string schedule_curve_csv(const ScheduleSpec& spec, std::size_t points) {
  if (points < 2) throw std::invalid_argument("schedule: need at least 2 points");
  if (!is_budget_aware(spec)) {
    throw std::invalid_argument("schedule: " + std::string(to_string(spec.kind)) +
                                " is budget-unaware here; give drops or bac_origin");
  }
  std::string out = "progress,ratio\n";
  for (std::size_t i = 0; i < points; ++i) {
    const double p = i + 1 == points ? std::nextafter(1.0, 0.0)
                                     : static_cast<double>(i) / static_cast<double>(points - 1);
    out += format_double(p) + ',' + format_double(eval_schedule_at(spec, p)) + '\n';
  }
  return out;
}

int cmd_run(const CommandOptions& options, std::ostream& log) {
  const RunConfig config = load_for_command(options);
  if (!config.budget.fraction && !config.budget.iters) {
    throw ConfigError("budget", "exactly one of fraction, iters must be present");
  }
  if (config.seeds.size() != 1) throw ConfigError("seeds", "run takes a single seed");
  const std::uint64_t seed = config.seeds.front();
  prepare_output_dir(config.output, options.overwrite);
  const RunRecord run = execute_run(config, seed);
  write_run(config.output, config, seed, run);
  if (run.evals.empty()) {
    log << "no evaluations recorded\n";
    return 1;
  }
  const ConvergenceReport report = convergence_report(run);
  log << "best_val_acc=" << format_double(run.best_val_acc()) << '\n'
      << "best_progress=" << format_double(report.best_progress) << '\n';
  if (run.diverged) log << "diverged: " << run.divergence_reason << '\n';
  log << "output=" << config.output.string() << '\n';
  return run.diverged ? 3 : 0;
}

int cmd_sweep(const CommandOptions& options, std::ostream& log) {
  const RunConfig config = load_for_command(options);
  const SweepResult result = run_sweep(config, config.output, options.jobs.value_or(default_jobs()),
                                       options.overwrite);
  std::size_t failed = 0, resumed = 0;
  for (const auto& c : result.cells) {
    failed += c.ok ? 0 : 1;
    resumed += c.resumed ? 1 : 0;
    if (!c.ok) log << "cell " << c.schedule << " budget=" << format_double(c.budget) << " seed=" << c.seed
                   << " failed: " << c.error << '\n';
  }
  log << "cells=" << result.cells.size() << " failed=" << failed << " resumed=" << resumed << '\n'
      << "summary=" << (config.output / "summary.csv").string() << '\n';
  return failed == 0 ? 0 : 4;
}

int cmd_rank(const CommandOptions& options, std::ostream& log) {
  const RunConfig config = load_for_command(options);
  const RankSummary summary = run_rank(config, config.output, options.jobs.value_or(default_jobs()),
                                       options.overwrite);
  for (std::size_t s = 0; s < summary.schedules.size(); ++s) {
    for (std::size_t b = 0; b < summary.budgets.size(); ++b) {
      const auto t = summary.tau(s, b);
      log << summary.schedules[s] << " budget=" << format_double(summary.budgets[b])
          << " tau=" << (t ? format_double(*t) : std::string("undefined")) << '\n';
    }
  }
  log << "output=" << config.output.string() << '\n';
  return 0;
}

int cmd_subsample_compare(const CommandOptions& options, std::ostream& log) {
  const RunConfig config = load_for_command(options);
  const auto rows = run_subsample_compare(config, config.output, options.jobs.value_or(default_jobs()),
                                          options.overwrite);
  for (const auto& r : rows) {
    log << "budget=" << format_double(r.budget) << " full=" << format_double(r.full_acc)
        << " subset=" << format_double(r.subset_acc) << '\n';
  }
  log << "output=" << config.output.string() << '\n';
  return 0;
}

int cmd_schedule(std::string_view kind, std::span<const std::string> params, std::size_t points,
                 std::ostream& out) {
  std::string text = "kind=" + std::string(kind);
  for (const auto& p : params) text += ' ' + p;
  out << schedule_curve_csv(parse_schedule(text), points);
  return 0;
}

RunConfig standard_toy_config() {
  RunConfig c;
  GeneratorSpec& g = c.dataset.generator;
  g.kind = GeneratorKind::kBlobs;
  g.samples = 4000;
  g.classes = 4;
  g.dim = 4;
  g.separation = 2.5;
  g.clusters_per_class = 6;
  g.holdout = 0.25;
  c.model.hidden = {128, 128};
  c.optimizer = OptimizerConfig::sgd_defaults();
  c.optimizer.base_lr = 4.0;
  c.optimizer.weight_decay = 2e-3;
  c.schedule.name = "linear";
  c.schedule.spec = default_spec(ScheduleKind::kLinear);
  c.full_budget_epochs = 100.0;
  c.budget.fraction = 1.0;
  c.batch_size = 64;
  c.seeds = {1, 2, 3};
  return c;
}

}  // namespace budgeted
