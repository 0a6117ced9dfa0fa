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
#include "budgeted/persistence.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "budgeted/text_format.hpp"
#include "json.hpp"

namespace budgeted {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string iterations_csv(const RunRecord& run) {
  std::string out(kIterationsHeader);
  out += '\n';
  for (const auto& p : run.iterations) {
    out += std::to_string(p.iter) + ',' + format_double(p.beta) + ',' + format_double(p.lr) + ',' +
           format_double(p.train_loss) + '\n';
  }
  return out;
}

std::string epochs_csv(const RunRecord& run) {
  std::string out(kEpochsHeader);
  out += '\n';
  for (const auto& e : run.evals) {
    out += format_double(e.epoch) + ',' + format_double(e.val_acc) + ',' +
           format_double(e.full_grad_norm) + ',' + format_double(e.weight_norm) + '\n';
  }
  return out;
}

std::string equivalent_lr_csv(const RunRecord& run) {
  std::string out(kEquivalentLrHeader);
  out += '\n';
  for (const auto& e : run.evals) {
    out += format_double(e.epoch) + ',' + format_double(e.equivalent_lr) + '\n';
  }
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("csv: no column " + std::string(name));
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (table.header.empty()) {
      for (auto c : cells) table.header.emplace_back(trim(c));
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(table.header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) {
      row.push_back(parse_double(trim(c), "csv line " + std::to_string(line_no)));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw std::invalid_argument("csv: missing header");
  return table;
}

std::string manifest_json(const RunConfig& config, std::uint64_t seed, const RunRecord& run,
                          const ConvergenceReport& report) {
  RunConfig single = config;
  single.seeds = {seed};
  json j;
  j["config"] = json::parse(to_json(single));
  j["seed"] = seed;
  json r;
  r["schedule"] = format_schedule(run.meta.schedule);
  r["optimizer"] = std::string(to_string(run.meta.optimizer.kind));
  r["budget_iters"] = run.meta.budget;
  r["iters_per_epoch"] = run.meta.iters_per_epoch;
  r["batch_size"] = run.meta.batch_size;
  r["eval_every"] = run.meta.eval_every;
  r["dataset_fingerprint"] = hex64(run.meta.dataset_fingerprint);
  r["train_size"] = run.meta.train_size;
  r["model"] = run.meta.model;
  j["resolved"] = r;
  json res;
  res["diverged"] = run.diverged;
  if (run.diverged) res["divergence_reason"] = run.divergence_reason;
  res["evaluations"] = run.evals.size();
  res["best_val_acc"] = run.best_val_acc();
  res["best_progress"] = run.evals.empty() ? json(nullptr) : json(report.best_progress);
  res["final_grad_norm"] = number_or_null(report.final_grad_norm);
  res["final_weight_norm"] = number_or_null(report.final_weight_norm);
  j["results"] = res;
  return j.dump(2) + "\n";
}

void prepare_output_dir(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec) && !overwrite) {
    throw OutputExistsError("output directory " + dir.string() +
                            " is not empty; pass --overwrite to replace it");
  }
  fs::create_directories(dir);
}

void write_run(const fs::path& dir, const RunConfig& config, std::uint64_t seed,
               const RunRecord& run) {
  fs::create_directories(dir);
  ConvergenceReport report;
  if (!run.evals.empty()) report = convergence_report(run);
  write_file_atomic(dir / "iterations.csv", iterations_csv(run));
  write_file_atomic(dir / "epochs.csv", epochs_csv(run));
  if (run.meta.optimizer.kind == OptimizerKind::kAmsgrad) {
    write_file_atomic(dir / "equivalent_lr.csv", equivalent_lr_csv(run));
  }
  if (!run.evals.empty()) {
    write_file_atomic(dir / "report.txt", format_report(report));
    write_file_atomic(dir / "report.csv", report_csv_header() + "\n" + report_csv_row(report) + "\n");
  }
  write_file_atomic(dir / "manifest.json", manifest_json(config, seed, run, report));
}

}  // namespace budgeted
