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
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "budgeted/diagnostics.hpp"
#include "budgeted/experiment.hpp"
#include "budgeted/parallel.hpp"
#include "budgeted/persistence.hpp"
#include "budgeted/ranking.hpp"
#include "budgeted/schedules.hpp"

using namespace budgeted;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return got == want ? 0.0 : std::abs(got - want) / scale;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};
std::map<int, Outcome> outcomes;

void report(int id, bool pass, const std::string& detail) {
  outcomes[id] = {pass, detail};
  std::fprintf(stderr, "[progress] AC%d %s\n", id, pass ? "pass" : "fail");
}

std::string fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

// Closed forms, written against the formulas rather than the library.
double closed_form(const ScheduleSpec& s, double p) {
  constexpr double pi = std::numbers::pi;
  switch (s.kind) {
    case ScheduleKind::kConstant: return 1.0;
    case ScheduleKind::kLinear: return 1.0 - p;
    case ScheduleKind::kPoly: return std::pow(1.0 - p, s.gamma);
    case ScheduleKind::kCosine: return s.eta + 0.5 * (1.0 - s.eta) * (1.0 + std::cos(pi * p));
    case ScheduleKind::kHtd:
      return s.eta + 0.5 * (1.0 - s.eta) * (1.0 - std::tanh(s.lower_l + (s.upper_u - s.lower_l) * p));
    case ScheduleKind::kStep: {
      int k = 0;
      for (double d : s.drops) k += p >= d ? 1 : 0;
      return std::pow(s.gamma, k);
    }
    case ScheduleKind::kExponential: return std::pow(std::pow(s.gamma, s.bac_origin), p);
    case ScheduleKind::kSgdrAware: {
      const double q = std::fmod(p * static_cast<double>(s.n_restarts + 1), 1.0);
      return s.eta + 0.5 * (1.0 - s.eta) * (1.0 + std::cos(pi * q));
    }
    default: return std::nan("");
  }
}

void schedule_suite() {
  const auto start = Clock::now();
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ScheduleSpec step = default_spec(ScheduleKind::kStep);
  step.drops = {0.3, 0.6, 0.8};
  ScheduleSpec expo = default_spec(ScheduleKind::kExponential);
  expo.gamma = 0.97;
  expo = bac_convert(expo, 150.0);
  ScheduleSpec cosine = default_spec(ScheduleKind::kCosine);
  cosine.eta = 0.01;
  ScheduleSpec htd = default_spec(ScheduleKind::kHtd);
  htd.eta = 0.02;
  ScheduleSpec sgdr = default_spec(ScheduleKind::kSgdrAware);
  sgdr.n_restarts = 3;
  const ScheduleSpec specs[] = {default_spec(ScheduleKind::kConstant), step, expo, default_spec(ScheduleKind::kPoly),
                                cosine, htd, default_spec(ScheduleKind::kLinear), sgdr};
  double worst = 0.0;
  for (const auto& s : specs) {
    for (int i = 0; i < 1000; ++i) {
      const double p = unit(gen);
      worst = std::max(worst, rel_err(eval_schedule_at(s, p), closed_form(s, p)));
    }
  }
  const double elapsed = seconds_since(start);
  report(1, worst <= 1e-12 && elapsed < 1.0,
         fmt("8 schedules x 1000 points, max rel err %.2e, %.3f s", worst, elapsed));
}

void bac_identity() {
  std::mt19937_64 gen(2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto T0 = static_cast<std::int64_t>(10 + gen() % 300);
    const auto T = static_cast<std::int64_t>(1 + gen() % 2000);
    const auto t = static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(T));
    ScheduleSpec s;
    switch (i % 3) {
      case 0:
        s = default_spec(ScheduleKind::kStep);
        s.drop_times = {static_cast<double>(1 + gen() % static_cast<std::uint64_t>(T0 / 2)),
                        static_cast<double>(T0 / 2 + 1 + gen() % static_cast<std::uint64_t>(T0 / 2 - 1))};
        break;
      case 1:
        s = default_spec(ScheduleKind::kExponential);
        s.gamma = 0.9 + 0.1 * static_cast<double>(gen() % 1000) / 1000.0;
        break;
      default:
        s = default_spec(ScheduleKind::kSgdrUnaware);
        s.t0_period = static_cast<double>(1 + gen() % 30);
        s.t_mult = static_cast<double>(1 + gen() % 3);
    }
    const double lhs = eval_schedule(bac_convert(s, static_cast<double>(T0)), BudgetClock(t, T));
    const double rhs = eval_unaware(s, static_cast<double>(t) * static_cast<double>(T0) / static_cast<double>(T));
    worst = std::max(worst, rel_err(lhs, rhs));
  }
  ScheduleSpec step = default_spec(ScheduleKind::kStep);
  step.drop_times = {30, 60};
  const ScheduleSpec drops = bac_convert(step, 90);
  const bool drops_ok = drops.drops.size() == 2 && rel_err(drops.drops[0], 1.0 / 3.0) <= 1e-12 &&
                        rel_err(drops.drops[1], 2.0 / 3.0) <= 1e-12;
  ScheduleSpec expo = default_spec(ScheduleKind::kExponential);
  expo.gamma = 0.99;
  const ScheduleSpec e = bac_convert(expo, 200);
  double expo_err = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 101.0;
    expo_err = std::max(expo_err, rel_err(eval_schedule_at(e, p), std::pow(std::pow(0.99, 200), p)));
  }
  report(2, worst <= 1e-12 && drops_ok && expo_err <= 1e-12,
         fmt("1000 tuples max rel err %.2e; {30,60}/90 drops ", worst) + (drops_ok ? "ok" : "wrong") +
             fmt("; 0.99 over 200 epochs max rel err %.2e", expo_err));
}

double l2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void gradient_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 gen(3);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Architecture arch;
    arch.input_dim = 1 + static_cast<int>(gen() % 6);
    arch.num_classes = trial % 4 == 0 ? 2 : 2 + static_cast<int>(gen() % 5);
    arch.activation = trial % 2 ? Activation::kTanh : Activation::kRelu;
    const int depth = trial % 4;
    const int width = 2 + static_cast<int>(gen() % 10);
    for (int l = 0; l < depth; ++l) {
      arch.hidden.push_back(width);
      arch.skip.push_back(l > 0 && gen() % 2 == 0);
    }
    const Network net(arch);
    const auto w0 = net.init_weights(gen());
    Examples batch;
    const int n = 1 + static_cast<int>(gen() % 16);
    batch.features.resize(arch.input_dim, n);
    std::normal_distribution<double> normal;
    for (int j = 0; j < n; ++j) {
      for (int d = 0; d < arch.input_dim; ++d) batch.features(d, j) = normal(gen);
      batch.labels.push_back(static_cast<int>(gen() % static_cast<unsigned>(arch.num_classes)));
    }
    std::vector<double> analytic(net.num_params());
    net.loss_and_gradient(w0, batch, analytic);
    std::vector<double> w = w0;
    std::vector<double> diff(w.size());
    std::vector<double> numeric(w.size());
    const double h = 1e-6;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = w0[i] + h;
      const double up = net.loss(w, batch);
      w[i] = w0[i] - h;
      const double down = net.loss(w, batch);
      w[i] = w0[i];
      numeric[i] = (up - down) / (2 * h);
      diff[i] = analytic[i] - numeric[i];
    }
    worst = std::max(worst, l2(diff) / std::max({l2(analytic), l2(numeric), 1e-8}));
  }
  const double elapsed = seconds_since(start);
  report(3, worst <= 1e-4 && elapsed < 30.0,
         fmt("50 (model, batch) pairs, max rel err %.2e, %.2f s", worst, elapsed));
}

ScheduleConfig named(std::string name, ScheduleSpec spec, Conversion c = Conversion::kBac) {
  ScheduleConfig s;
  s.name = std::move(name);
  s.spec = std::move(spec);
  s.conversion = c;
  return s;
}

ScheduleSpec step_drops_33_66() {
  ScheduleSpec s = default_spec(ScheduleKind::kStep);
  s.drop_times = {33, 66};
  return s;
}

SweepResult sweep(const RunConfig& base, std::vector<ScheduleConfig> schedules, std::vector<double> budgets,
                  unsigned jobs) {
  RunConfig c = base;
  c.sweep = SweepConfig{std::move(schedules), std::move(budgets)};
  return run_sweep(c, fs::path{}, jobs, false);
}

// Per-seed cells of (schedule s, budget b).
std::vector<SweepCell> cells_of(const SweepResult& r, std::size_t s, std::size_t b, std::size_t n_seeds) {
  const auto first = r.cells.begin() + static_cast<std::ptrdiff_t>((s * r.budgets.size() + b) * n_seeds);
  return {first, first + static_cast<std::ptrdiff_t>(n_seeds)};
}

template <typename Field>
double median_field(const std::vector<SweepCell>& cells, Field field) {
  std::vector<double> v;
  for (const auto& c : cells) v.push_back(field(c));
  return median(v);
}

void toy_trends(const RunConfig& toy, unsigned jobs) {
  const std::size_t n = toy.seeds.size();
  const auto acc = [](const SweepCell& c) { return c.best_val_acc; };

  // AC4: linear and both step conversions at small budgets.
  const auto start4 = Clock::now();
  const std::vector<double> small = {0.05, 0.1, 0.25};
  const SweepResult r4 = sweep(toy,
                               {named("linear", default_spec(ScheduleKind::kLinear)),
                                named("step-bac", step_drops_33_66(), Conversion::kBac),
                                named("step-es", step_drops_33_66(), Conversion::kEarlyStop)},
                               small, jobs);
  const double per_seed4 = seconds_since(start4) * std::max(1u, jobs) / static_cast<double>(n);
  bool ok4 = per_seed4 < 600.0;
  std::string d4;
  for (std::size_t b = 0; b < small.size(); ++b) {
    const double lin = r4.median(0, b), bac = r4.median(1, b), es = r4.median(2, b);
    ok4 = ok4 && bac > es && lin >= bac - 0.005;
    d4 += fmt("%g%%: bac %.4f es %.4f linear %.4f; ", 100 * small[b], bac, es, lin);
  }
  report(4, ok4, d4 + fmt("%.0f s per seed", per_seed4));

  // AC5 and AC6.
  const std::vector<double> large = {0.1, 0.25, 0.5, 1.0};
  const SweepResult r56 = sweep(toy,
                                {named("linear", default_spec(ScheduleKind::kLinear)),
                                 named("poly", default_spec(ScheduleKind::kPoly))},
                                large, jobs);
  const std::vector<double> ac5_budgets = {0.1, 0.5, 1.0};
  const SweepResult rc = sweep(toy, {named("constant", default_spec(ScheduleKind::kConstant))}, ac5_budgets, jobs);
  const auto grad = [](const SweepCell& c) { return c.final_grad_norm; };
  bool ok5 = true;
  std::string d5;
  for (std::size_t b = 0; b < ac5_budgets.size(); ++b) {
    const std::size_t lb = static_cast<std::size_t>(
        std::find(large.begin(), large.end(), ac5_budgets[b]) - large.begin());
    const double gl = median_field(cells_of(r56, 0, lb, n), grad);
    const double gc = median_field(cells_of(rc, 0, b, n), grad);
    ok5 = ok5 && gl < 0.5 * gc;
    d5 += fmt("%g%%: linear %.4g constant %.4g; ", 100 * ac5_budgets[b], gl, gc);
  }
  report(5, ok5, d5);

  std::vector<double> bp_lin, bp_poly;
  for (std::size_t b = 0; b < large.size(); ++b) {
    for (const auto& c : cells_of(r56, 0, b, n)) bp_lin.push_back(c.best_progress);
    for (const auto& c : cells_of(r56, 1, b, n)) bp_poly.push_back(c.best_progress);
  }
  const double ml = median(bp_lin), mp = median(bp_poly);
  std::string d6 = fmt("median best_progress over budgets >= 10%%: linear %.3f poly %.3f; per budget linear", ml, mp);
  for (std::size_t b = 0; b < large.size(); ++b) {
    d6 += fmt(" %.2f", median_field(cells_of(r56, 0, b, n), [](const SweepCell& c) { return c.best_progress; }));
  }
  report(6, ml >= 0.90 && mp >= 0.90, d6);

  // AC9: linear against budget-aware SGDR with one restart at 10%.
  ScheduleSpec sgdr = default_spec(ScheduleKind::kSgdrAware);
  sgdr.n_restarts = 1;
  const SweepResult r9 = sweep(toy, {named("sgdr-r1", sgdr)}, {0.1}, jobs);
  const double lin10 = median_field(cells_of(r4, 0, 1, n), acc);
  report(9, lin10 >= r9.median(0, 0), fmt("10%%: linear %.4f sgdr-r1 %.4f", lin10, r9.median(0, 0)));
}

void equivalent_lr_check(const RunConfig& toy) {
  // Closed form: constant unit gradient, t = 1 and the steady state.
  const auto cfg = OptimizerConfig::amsgrad_defaults();
  auto state = OptimizerState::init(std::vector<double>(3, 0.0), OptimizerKind::kAmsgrad);
  const std::vector<double> ones(3, 1.0);
  amsgrad_step(state, ones, cfg);
  double closed_err = std::abs(equivalent_lr(state, cfg, 0.1) - 0.01 / (0.1 * (1.0 + 1e-8)));
  for (int i = 1; i < 3000; ++i) amsgrad_step(state, ones, cfg);
  closed_err = std::max(closed_err, std::abs(equivalent_lr(state, cfg, 0.1) - 0.01 / (1.0 + 1e-8)));

  RunConfig c = toy;
  const double weight_decay = c.optimizer.weight_decay;
  c.optimizer = OptimizerConfig::amsgrad_defaults();
  c.optimizer.weight_decay = weight_decay;
  c.reference_lr = 0.1;
  c.schedule = named("constant", default_spec(ScheduleKind::kConstant));
  c.budget = BudgetConfig{0.25, std::nullopt};
  std::vector<double> ratios;
  for (std::uint64_t seed : c.seeds) {
    const RunRecord run = execute_run(c, seed);
    const auto T = static_cast<double>(run.meta.budget);
    std::vector<double> r;
    for (const auto& e : run.evals) {
      if (2 * e.iteration <= run.meta.budget) continue;
      const double linear_beta = 1.0 - static_cast<double>(e.iteration - 1) / T;
      r.push_back(e.equivalent_lr / linear_beta);
    }
    ratios.push_back(median(r));
  }
  const double ratio = median(ratios);
  report(8, ratio >= 10.0 && closed_err <= 1e-9,
         fmt("median equivalent/linear ratio over final half %.2f; closed-form err %.1e", ratio, closed_err));
}

std::optional<double> pair_count_tau(const std::vector<double>& a, const std::vector<double>& b) {
  long long con = 0, dis = 0, ta = 0, tb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0 && db == 0) continue;
      if (da == 0) ++ta;
      else if (db == 0) ++tb;
      else if ((da > 0) == (db > 0)) ++con;
      else ++dis;
    }
  }
  const double n1 = static_cast<double>(con + dis + tb), n2 = static_cast<double>(con + dis + ta);
  if (n1 == 0 || n2 == 0) return std::nullopt;
  return static_cast<double>(con - dis) / std::sqrt(n1 * n2);
}

void ranking_check(const RunConfig& toy, unsigned jobs) {
  std::mt19937_64 gen(7);
  bool oracle_ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 50;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(gen() % 6);
      b[i] = static_cast<double>(gen() % 9);
    }
    const auto got = kendall_tau(a, b);
    const auto want = pair_count_tau(a, b);
    oracle_ok = oracle_ok && got.has_value() == want.has_value() && (!got || *got == *want);
  }

  RunConfig c = toy;
  RankConfig rc;
  rc.family_size = 20;
  rc.schedules = {named("linear", default_spec(ScheduleKind::kLinear)),
                  named("cosine", default_spec(ScheduleKind::kCosine)),
                  named("constant", default_spec(ScheduleKind::kConstant))};
  rc.budgets = {0.05, 0.1};
  c.rank = rc;
  const RankSummary s = run_rank(c, fs::path{}, jobs, false);
  bool ok = oracle_ok;
  std::string d = std::string("tau oracle ") + (oracle_ok ? "exact" : "MISMATCH") + "; ";
  for (std::size_t b = 0; b < s.budgets.size(); ++b) {
    const auto lin = s.tau(0, b), cos = s.tau(1, b), con = s.tau(2, b);
    const bool cell_ok = lin && cos && con && *lin >= *con && *cos >= *con;
    ok = ok && cell_ok;
    d += fmt("%g%%: linear %.3f cosine %.3f constant %.3f; ", 100 * s.budgets[b], lin.value_or(std::nan("")),
             cos.value_or(std::nan("")), con.value_or(std::nan("")));
  }
  report(7, ok, d);
}

void subsample_check(const RunConfig& toy, unsigned jobs) {
  RunConfig c = toy;
  c.schedule = named("step", step_drops_33_66(), Conversion::kBac);
  c.subsample = SubsampleConfig{{0.05, 0.1, 0.25}};
  const auto rows = run_subsample_compare(c, fs::path{}, jobs, false);
  bool ok = true;
  std::string d;
  for (const auto& r : rows) {
    ok = ok && r.full_acc >= r.subset_acc;
    d += fmt("%g%%: full %.4f subset %.4f; ", 100 * r.budget, r.full_acc, r.subset_acc);
  }
  report(10, ok, d);
}

void determinism_check(const RunConfig& toy) {
  const fs::path root = fs::temp_directory_path() / "budgeted_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  RunConfig c = toy;
  c.budget = BudgetConfig{0.05, std::nullopt};
  c.seeds = {5};
  c.schedule = named("step", step_drops_33_66(), Conversion::kBac);
  write_file_atomic(root / "config.json", to_json(c));
  std::ostringstream log;
  bool same = true;
  for (const char* dir : {"a", "b"}) {
    CommandOptions o;
    o.config_path = root / "config.json";
    o.out = root / dir;
    cmd_run(o, log);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    if (entry.path().extension() != ".csv") continue;
    same = same && read_file(entry.path()) == read_file(root / "b" / entry.path().filename());
    ++compared;
  }
  fs::remove_all(root);
  report(11, same && compared >= 2, "byte-identical CSVs across " + std::to_string(compared) + " files");
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const unsigned jobs = default_jobs();
  const RunConfig toy = standard_toy_config();
  const std::vector<std::pair<std::vector<int>, std::function<void()>>> criteria = {
      {{1}, schedule_suite},
      {{2}, bac_identity},
      {{3}, gradient_oracle},
      {{11}, [&] { determinism_check(toy); }},
      {{4, 5, 6, 9}, [&] { toy_trends(toy, jobs); }},
      {{8}, [&] { equivalent_lr_check(toy); }},
      {{10}, [&] { subsample_check(toy, jobs); }},
      {{7}, [&] { ranking_check(toy, jobs); }},
  };
  for (const auto& [ids, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      for (int id : ids) {
        if (!outcomes.count(id)) outcomes[id] = {false, std::string("error: ") + e.what()};
      }
    }
  }
  int failures = 0;
  for (int id = 1; id <= 11; ++id) {
    const auto it = outcomes.find(id);
    const Outcome o = it == outcomes.end() ? Outcome{false, "not run"} : it->second;
    failures += o.pass ? 0 : 1;
    std::printf("AC%-2d %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  }
  std::printf("acceptance: %d of 11 failing, %.0f s total\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
