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
#include "budgeted/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "budgeted/rng.hpp"
#include "budgeted/train.hpp"
#include "json.hpp"

namespace budgeted {

using nlohmann::json;

namespace {

constexpr std::uint64_t kDataStream = 0x6461746100000000ULL;

// Keyed view of a JSON object that remembers which keys were read.
class Object {
 public:
  Object(const json& value, std::string path) : value_(value), path_(std::move(path)) {
    if (!value_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(std::string_view key) {
    auto it = value_.find(std::string(key));
    if (it == value_.end()) return nullptr;
    seen_.insert(std::string(key));
    return &*it;
  }

  bool has(std::string_view key) const { return value_.contains(std::string(key)); }

  double number(std::string_view key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(field(key), "expected a number");
    return v->get<double>();
  }

  std::int64_t integer(std::string_view key, std::int64_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    return as_integer(*v, field(key));
  }

  std::uint64_t seed(std::string_view key, std::uint64_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    return as_seed(*v, field(key));
  }

  bool boolean(std::string_view key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::string text(std::string_view key, std::string fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    return v->get<std::string>();
  }

  std::string required_text(std::string_view key) {
    if (!has(key)) throw ConfigError(field(key), "missing required key");
    return text(key, "");
  }

  std::vector<double> numbers(std::string_view key, std::vector<double> fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back((*v)[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = value_.begin(); it != value_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

  static std::int64_t as_integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
      throw ConfigError(where, "integer out of range");
    }
    return v.get<std::int64_t>();
  }

  static std::uint64_t as_seed(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) throw ConfigError(where, "seed must be non-negative");
    throw ConfigError(where, "expected a non-negative integer");
  }

 private:
  const json& value_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void rethrow_as(const std::string& field, F&& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

Conversion parse_conversion(const std::string& text, const std::string& where) {
  if (text == "bac") return Conversion::kBac;
  if (text == "early_stop") return Conversion::kEarlyStop;
  throw ConfigError(where, "expected \"bac\" or \"early_stop\", got \"" + text + "\"");
}

std::string_view conversion_name(Conversion c) { return c == Conversion::kBac ? "bac" : "early_stop"; }

ScheduleConfig parse_schedule_config(const json& value, const std::string& path) {
  Object o(value, path);
  ScheduleConfig out;
  const std::string kind_text = o.required_text("kind");
  ScheduleKind kind{};
  rethrow_as(o.field("kind"), [&] { kind = parse_schedule_kind(kind_text); });
  ScheduleSpec& s = out.spec;
  s = default_spec(kind);
  out.name = o.text("name", std::string(to_string(kind)));
  if (out.name.empty()) throw ConfigError(o.field("name"), "must not be empty");
  s.gamma = o.number("gamma", s.gamma);
  s.eta = o.number("eta", s.eta);
  s.lower_l = o.number("L", s.lower_l);
  s.upper_u = o.number("U", s.upper_u);
  s.drops = o.numbers("drops", s.drops);
  s.drop_times = o.numbers("drop_times", s.drop_times);
  s.t0_period = o.number("t0", s.t0_period);
  s.t_mult = o.number("t_mult", s.t_mult);
  s.n_restarts = o.integer("restarts", s.n_restarts);
  s.bac_origin = o.number("bac_origin", s.bac_origin);
  s.warmup_iters = o.integer("warmup", s.warmup_iters);
  out.conversion = parse_conversion(o.text("conversion", "bac"), o.field("conversion"));
  o.finish();
  rethrow_as(path, [&] { validate(s); });
  return out;
}

std::vector<ScheduleConfig> parse_schedule_list(Object& parent, std::string_view key) {
  const json* v = parent.find(key);
  if (!v) return {};
  if (!v->is_array()) throw ConfigError(parent.field(key), "expected an array of schedules");
  std::vector<ScheduleConfig> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const std::string where = parent.field(key) + "[" + std::to_string(i) + "]";
    out.push_back(parse_schedule_config((*v)[i], where));
    if (!names.insert(out.back().name).second) {
      throw ConfigError(where + ".name", "duplicate schedule name \"" + out.back().name + "\"");
    }
  }
  return out;
}

json schedule_json(const ScheduleConfig& sc) {
  const ScheduleSpec& s = sc.spec;
  const ScheduleSpec d = default_spec(s.kind);
  json j;
  j["kind"] = std::string(to_string(s.kind));
  j["name"] = sc.name;
  if (s.gamma != d.gamma) j["gamma"] = s.gamma;
  if (s.eta != d.eta) j["eta"] = s.eta;
  if (s.lower_l != d.lower_l) j["L"] = s.lower_l;
  if (s.upper_u != d.upper_u) j["U"] = s.upper_u;
  if (!s.drops.empty()) j["drops"] = s.drops;
  if (!s.drop_times.empty()) j["drop_times"] = s.drop_times;
  if (s.t0_period != d.t0_period) j["t0"] = s.t0_period;
  if (s.t_mult != d.t_mult) j["t_mult"] = s.t_mult;
  if (s.n_restarts != d.n_restarts) j["restarts"] = s.n_restarts;
  if (s.bac_origin != d.bac_origin) j["bac_origin"] = s.bac_origin;
  if (s.warmup_iters != 0) j["warmup"] = s.warmup_iters;
  j["conversion"] = std::string(conversion_name(sc.conversion));
  return j;
}

void check_fractions(const std::vector<double>& budgets, const std::string& where) {
  if (budgets.empty()) throw ConfigError(where, "empty grid");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 0.0 && budgets[i] <= 1.0)) {
      throw ConfigError(where + "[" + std::to_string(i) + "]", "budget fraction must be in (0, 1]");
    }
  }
}

DatasetConfig parse_dataset(const json& value) {
  Object o(value, "dataset");
  DatasetConfig d;
  GeneratorSpec& g = d.generator;
  const std::string csv = o.text("csv", "");
  d.csv_path = csv;
  if (csv.empty()) {
    rethrow_as(o.field("generator"), [&] { g.kind = parse_generator_kind(o.text("generator", "blobs")); });
    const std::int64_t samples = o.integer("samples", static_cast<std::int64_t>(g.samples));
    if (samples < 1) throw ConfigError(o.field("samples"), "must be positive");
    g.samples = static_cast<std::size_t>(samples);
    g.classes = static_cast<int>(o.integer("classes", g.classes));
    g.dim = static_cast<int>(o.integer("dim", g.dim));
    g.separation = o.number("separation", g.separation);
    g.clusters_per_class = static_cast<int>(o.integer("clusters_per_class", g.clusters_per_class));
    g.noise = o.number("noise", g.noise);
    g.turns = o.number("turns", g.turns);
    g.margin = o.number("margin", g.margin);
  }
  g.holdout = o.number("holdout", g.holdout);
  if (o.has("seed")) d.seed = o.seed("seed", 0);
  o.finish();
  if (csv.empty()) {
    rethrow_as("dataset", [&] { validate(g); });
  } else if (!(g.holdout > 0.0 && g.holdout < 1.0)) {
    throw ConfigError("dataset.holdout", "must be in (0, 1)");
  }
  return d;
}

json dataset_json(const DatasetConfig& d) {
  json j;
  const GeneratorSpec& g = d.generator;
  if (!d.csv_path.empty()) {
    j["csv"] = d.csv_path.string();
  } else {
    j["generator"] = std::string(to_string(g.kind));
    j["samples"] = g.samples;
    j["classes"] = g.classes;
    j["dim"] = g.dim;
    j["separation"] = g.separation;
    j["clusters_per_class"] = g.clusters_per_class;
    j["noise"] = g.noise;
    j["turns"] = g.turns;
    j["margin"] = g.margin;
  }
  j["holdout"] = g.holdout;
  if (d.seed) j["seed"] = *d.seed;
  return j;
}

ModelConfig parse_model(const json& value) {
  Object o(value, "model");
  ModelConfig m;
  if (const json* h = o.find("hidden")) {
    if (!h->is_array()) throw ConfigError("model.hidden", "expected an array of widths");
    for (std::size_t i = 0; i < h->size(); ++i) {
      const std::string where = "model.hidden[" + std::to_string(i) + "]";
      const std::int64_t w = Object::as_integer((*h)[i], where);
      if (w < 1 || w > 1 << 16) throw ConfigError(where, "width must be in [1, 65536]");
      m.hidden.push_back(static_cast<int>(w));
    }
  }
  rethrow_as("model.activation", [&] { m.activation = parse_activation(o.text("activation", "relu")); });
  if (const json* s = o.find("skip")) {
    if (!s->is_array()) throw ConfigError("model.skip", "expected an array of booleans");
    for (std::size_t i = 0; i < s->size(); ++i) {
      if (!(*s)[i].is_boolean()) {
        throw ConfigError("model.skip[" + std::to_string(i) + "]", "expected true or false");
      }
      m.skip.push_back((*s)[i].get<bool>());
    }
  }
  o.finish();
  return m;
}

OptimizerConfig parse_optimizer(const json& value, double& reference_lr) {
  Object o(value, "optimizer");
  OptimizerKind kind{};
  rethrow_as("optimizer.kind", [&] { kind = parse_optimizer_kind(o.text("kind", "sgd")); });
  OptimizerConfig c = kind == OptimizerKind::kAmsgrad ? OptimizerConfig::amsgrad_defaults()
                                                      : OptimizerConfig::sgd_defaults();
  c.base_lr = o.number("base_lr", c.base_lr);
  c.momentum = o.number("momentum", c.momentum);
  c.second_moment = o.number("second_moment", c.second_moment);
  c.epsilon = o.number("epsilon", c.epsilon);
  c.weight_decay = o.number("weight_decay", c.weight_decay);
  reference_lr = o.number("reference_lr", reference_lr);
  o.finish();
  rethrow_as("optimizer", [&] { validate(c); });
  if (!(reference_lr > 0.0)) throw ConfigError("optimizer.reference_lr", "must be positive");
  return c;
}

BudgetConfig parse_budget(const json& value) {
  Object o(value, "budget");
  BudgetConfig b;
  if (o.has("fraction")) b.fraction = o.number("fraction", 0.0);
  if (o.has("iters")) b.iters = o.integer("iters", 0);
  o.finish();
  if (b.fraction.has_value() == b.iters.has_value()) {
    throw ConfigError("budget", "exactly one of fraction, iters must be present");
  }
  if (b.fraction && !(*b.fraction > 0.0 && *b.fraction <= 1.0)) {
    throw ConfigError("budget.fraction", "must be in (0, 1], got " + json(*b.fraction).dump());
  }
  if (b.iters && *b.iters < 1) throw ConfigError("budget.iters", "must be at least 1");
  return b;
}

}  // namespace

ConfigError::ConfigError(const std::string& field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(field) {}

RunConfig parse_run_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  Object o(root, "");
  RunConfig c;
  if (const json* v = o.find("dataset")) c.dataset = parse_dataset(*v);
  if (const json* v = o.find("model")) c.model = parse_model(*v);
  if (const json* v = o.find("optimizer")) c.optimizer = parse_optimizer(*v, c.reference_lr);
  if (const json* v = o.find("schedule")) {
    c.schedule = parse_schedule_config(*v, "schedule");
  } else {
    c.schedule.spec = default_spec(ScheduleKind::kLinear);
    c.schedule.name = "linear";
  }
  c.full_budget_epochs = o.number("full_budget_epochs", c.full_budget_epochs);
  if (const json* v = o.find("budget")) c.budget = parse_budget(*v);
  const std::int64_t batch = o.integer("batch_size", static_cast<std::int64_t>(c.batch_size));
  if (batch < 1) throw ConfigError("batch_size", "must be at least 1");
  c.batch_size = static_cast<std::size_t>(batch);
  if (o.has("seed") && o.has("seeds")) throw ConfigError("seeds", "give either seed or seeds, not both");
  if (o.has("seed")) c.seeds = {o.seed("seed", 0)};
  if (const json* v = o.find("seeds")) {
    if (!v->is_array() || v->empty()) throw ConfigError("seeds", "expected a non-empty array");
    c.seeds.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      c.seeds.push_back(Object::as_seed((*v)[i], "seeds[" + std::to_string(i) + "]"));
    }
  }
  c.eval_every = o.integer("eval_every", c.eval_every);
  c.divergence_threshold = o.number("divergence_threshold", c.divergence_threshold);
  c.output = o.text("output", c.output.string());
  if (const json* v = o.find("sweep")) {
    Object s(*v, "sweep");
    SweepConfig sweep;
    sweep.schedules = parse_schedule_list(s, "schedules");
    sweep.budgets = s.numbers("budgets", {});
    s.finish();
    c.sweep = std::move(sweep);
  }
  if (const json* v = o.find("rank")) {
    Object r(*v, "rank");
    RankConfig rank;
    const std::int64_t size = r.integer("family_size", static_cast<std::int64_t>(rank.family_size));
    if (size < 2) throw ConfigError("rank.family_size", "must be at least 2");
    rank.family_size = static_cast<std::size_t>(size);
    rank.schedules = parse_schedule_list(r, "schedules");
    rank.budgets = r.numbers("budgets", {});
    if (const json* ref = r.find("reference")) {
      const ScheduleConfig sc = parse_schedule_config(*ref, "rank.reference");
      if (!is_budget_aware(sc.spec)) throw ConfigError("rank.reference", "must be budget-aware");
      rank.reference = sc.spec;
    }
    r.finish();
    c.rank = std::move(rank);
  }
  if (const json* v = o.find("subsample")) {
    Object s(*v, "subsample");
    SubsampleConfig sub;
    sub.budgets = s.numbers("budgets", {});
    s.finish();
    c.subsample = std::move(sub);
  }
  o.finish();
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string to_json(const RunConfig& c) {
  json j;
  j["dataset"] = dataset_json(c.dataset);
  json model;
  model["hidden"] = c.model.hidden;
  model["activation"] = std::string(to_string(c.model.activation));
  if (!c.model.skip.empty()) model["skip"] = c.model.skip;
  j["model"] = model;
  json opt;
  opt["kind"] = std::string(to_string(c.optimizer.kind));
  opt["base_lr"] = c.optimizer.base_lr;
  opt["momentum"] = c.optimizer.momentum;
  opt["second_moment"] = c.optimizer.second_moment;
  opt["epsilon"] = c.optimizer.epsilon;
  opt["weight_decay"] = c.optimizer.weight_decay;
  opt["reference_lr"] = c.reference_lr;
  j["optimizer"] = opt;
  j["schedule"] = schedule_json(c.schedule);
  j["full_budget_epochs"] = c.full_budget_epochs;
  if (c.budget.fraction) j["budget"]["fraction"] = *c.budget.fraction;
  if (c.budget.iters) j["budget"]["iters"] = *c.budget.iters;
  j["batch_size"] = c.batch_size;
  j["seeds"] = c.seeds;
  j["eval_every"] = c.eval_every;
  j["divergence_threshold"] = c.divergence_threshold;
  j["output"] = c.output.string();
  if (c.sweep) {
    json s;
    s["schedules"] = json::array();
    for (const auto& sc : c.sweep->schedules) s["schedules"].push_back(schedule_json(sc));
    s["budgets"] = c.sweep->budgets;
    j["sweep"] = s;
  }
  if (c.rank) {
    json r;
    r["family_size"] = c.rank->family_size;
    r["schedules"] = json::array();
    for (const auto& sc : c.rank->schedules) r["schedules"].push_back(schedule_json(sc));
    r["budgets"] = c.rank->budgets;
    r["reference"] = schedule_json({std::string(to_string(c.rank->reference.kind)), c.rank->reference,
                                    Conversion::kBac});
    j["rank"] = r;
  }
  if (c.subsample) j["subsample"]["budgets"] = c.subsample->budgets;
  return j.dump(2) + "\n";
}

void validate(const RunConfig& c) {
  if (c.batch_size < 1) throw ConfigError("batch_size", "must be at least 1");
  if (!(c.full_budget_epochs > 0.0)) throw ConfigError("full_budget_epochs", "must be positive");
  if (c.seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  if (c.eval_every < 0) throw ConfigError("eval_every", "must be non-negative");
  if (!(c.divergence_threshold > 0.0)) throw ConfigError("divergence_threshold", "must be positive");
  if (!(c.reference_lr > 0.0)) throw ConfigError("optimizer.reference_lr", "must be positive");
  if (c.budget.fraction && c.budget.iters) {
    throw ConfigError("budget", "exactly one of fraction, iters must be present");
  }
  if (c.budget.fraction && !(*c.budget.fraction > 0.0 && *c.budget.fraction <= 1.0)) {
    throw ConfigError("budget.fraction", "must be in (0, 1]");
  }
  if (c.budget.iters && *c.budget.iters < 1) throw ConfigError("budget.iters", "must be at least 1");
  rethrow_as("optimizer", [&] { validate(c.optimizer); });
  rethrow_as("schedule", [&] { validate(c.schedule.spec); });
  if (c.model.hidden.size() > 3) throw ConfigError("model.hidden", "at most 3 hidden layers");
  if (!c.model.skip.empty() && c.model.skip.size() != c.model.hidden.size()) {
    throw ConfigError("model.skip", "needs one entry per hidden layer");
  }
  if (c.dataset.csv_path.empty()) rethrow_as("dataset", [&] { validate(c.dataset.generator); });
  if (c.sweep) {
    if (c.sweep->schedules.empty()) throw ConfigError("sweep.schedules", "empty grid");
    check_fractions(c.sweep->budgets, "sweep.budgets");
  }
  if (c.rank) {
    if (c.rank->schedules.empty()) throw ConfigError("rank.schedules", "empty grid");
    check_fractions(c.rank->budgets, "rank.budgets");
  }
  if (c.subsample) check_fractions(c.subsample->budgets, "subsample.budgets");
}

std::int64_t resolve_budget(const RunConfig& config, const BudgetConfig& budget,
                            std::int64_t iters_per_epoch) {
  if (budget.iters) return *budget.iters;
  if (!budget.fraction) throw ConfigError("budget", "exactly one of fraction, iters must be present");
  const auto full = static_cast<std::int64_t>(
      std::llround(config.full_budget_epochs * static_cast<double>(iters_per_epoch)));
  return budget_from_fraction(*budget.fraction, std::max<std::int64_t>(full, 1));
}

ScheduleSpec resolve_schedule(const ScheduleConfig& schedule, double full_budget_epochs,
                              std::int64_t run_iters, std::int64_t iters_per_epoch) {
  const double run_epochs = static_cast<double>(run_iters) / static_cast<double>(iters_per_epoch);
  ScheduleSpec out = make_budget_aware(schedule.spec, schedule.conversion, full_budget_epochs, run_epochs);
  out.warmup_iters = schedule.spec.warmup_iters;
  return out;
}

Dataset build_dataset(const DatasetConfig& dataset, std::uint64_t run_seed) {
  const std::uint64_t seed = dataset.seed ? *dataset.seed : derive_seed(run_seed, kDataStream);
  if (dataset.csv_path.empty()) return make_synthetic(dataset.generator, seed);
  Dataset data = holdout_split(load_csv(dataset.csv_path), dataset.generator.holdout, seed);
  standardize(data);
  return data;
}

Architecture build_architecture(const ModelConfig& model, const Dataset& data) {
  Architecture arch;
  arch.input_dim = static_cast<int>(data.dim());
  arch.num_classes = data.num_classes;
  arch.hidden = model.hidden;
  arch.activation = model.activation;
  arch.skip = model.skip.empty() ? std::vector<bool>(model.hidden.size(), false) : model.skip;
  validate(arch);
  return arch;
}

}  // namespace budgeted
