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

#include "budgeted/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>

#include "budgeted/text_format.hpp"

namespace budgeted {
namespace {

struct KindName {
  ScheduleKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {ScheduleKind::kConstant, "constant"},
    {ScheduleKind::kStep, "step"},
    {ScheduleKind::kExponential, "exponential"},
    {ScheduleKind::kPoly, "poly"},
    {ScheduleKind::kCosine, "cosine"},
    {ScheduleKind::kHtd, "htd"},
    {ScheduleKind::kLinear, "linear"},
    {ScheduleKind::kSgdrUnaware, "sgdr-unaware"},
    {ScheduleKind::kSgdrAware, "sgdr-aware"},
};

double cosine_decay(double q, double eta) {
  return eta + 0.5 * (1.0 - eta) * (1.0 + std::cos(std::numbers::pi * q));
}

double step_decay(std::span<const double> points, double x, double gamma) {
  // Half-open: a drop at d applies once x >= d.
  const auto k = std::upper_bound(points.begin(), points.end(), x) - points.begin();
  return std::pow(gamma, static_cast<double>(k));
}

void check_progress(double progress) {
  if (!(progress >= 0.0 && progress < 1.0)) {
    throw std::invalid_argument("schedule: progress must lie in [0, 1), got " +
                                format_double(progress));
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("schedule: " + message);
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  throw std::invalid_argument("schedule: unknown kind '" + std::string(name) + "'");
}

ScheduleSpec default_spec(ScheduleKind kind) {
  ScheduleSpec spec;
  spec.kind = kind;
  switch (kind) {
    case ScheduleKind::kStep:
      spec.gamma = 0.1;
      break;
    case ScheduleKind::kPoly:
      spec.gamma = 0.9;
      break;
    default:
      break;
  }
  return spec;
}

ScheduleSpec step_even(int times, double gamma) {
  require(times >= 0, "step_even needs a non-negative drop count");
  ScheduleSpec spec = default_spec(ScheduleKind::kStep);
  spec.gamma = gamma;
  for (int i = 1; i <= times; ++i) {
    spec.drops.push_back(static_cast<double>(i) / static_cast<double>(times + 1));
  }
  return spec;
}

void validate(const ScheduleSpec& spec) {
  require(spec.eta >= 0.0 && spec.eta < 1.0, "eta must lie in [0, 1)");
  require(spec.warmup_iters >= 0, "warmup_iters must be non-negative");
  require(spec.bac_origin >= 0.0 && std::isfinite(spec.bac_origin),
          "bac_origin must be finite and non-negative");
  switch (spec.kind) {
    case ScheduleKind::kStep:
      require(spec.gamma > 0.0 && spec.gamma <= 1.0, "step gamma must lie in (0, 1]");
      require(spec.drops.empty() || spec.drop_times.empty(),
              "step takes either progress drops or absolute drop times, not both");
      for (std::size_t i = 0; i < spec.drops.size(); ++i) {
        require(spec.drops[i] > 0.0 && spec.drops[i] < 1.0,
                "step drops must lie in (0, 1)");
        require(i == 0 || spec.drops[i] > spec.drops[i - 1],
                "step drops must be strictly increasing");
      }
      for (std::size_t i = 0; i < spec.drop_times.size(); ++i) {
        require(spec.drop_times[i] > 0.0 && std::isfinite(spec.drop_times[i]),
                "step drop times must be positive");
        require(i == 0 || spec.drop_times[i] > spec.drop_times[i - 1],
                "step drop times must be strictly increasing");
      }
      break;
    case ScheduleKind::kExponential:
      require(spec.gamma > 0.0 && spec.gamma <= 1.0,
              "exponential gamma must lie in (0, 1] and has no default");
      break;
    case ScheduleKind::kPoly:
      require(spec.gamma > 0.0, "poly gamma must be positive");
      break;
    case ScheduleKind::kHtd:
      require(std::isfinite(spec.lower_l) && std::isfinite(spec.upper_u),
              "htd L and U must be finite");
      break;
    case ScheduleKind::kSgdrUnaware:
      require(spec.t0_period > 0.0, "sgdr t0 must be positive");
      require(spec.t_mult >= 1.0, "sgdr t_mult must be >= 1");
      break;
    case ScheduleKind::kSgdrAware:
      require(spec.n_restarts >= 0, "sgdr restarts must be non-negative");
      break;
    default:
      break;
  }
}

bool is_budget_aware(const ScheduleSpec& spec) {
  switch (spec.kind) {
    case ScheduleKind::kStep:
      return spec.drop_times.empty();
    case ScheduleKind::kExponential:
    case ScheduleKind::kSgdrUnaware:
      return spec.bac_origin > 0.0;
    default:
      return true;
  }
}

BudgetClock::BudgetClock(std::int64_t t, std::int64_t total) : t_(t), total_(total) {
  if (total <= 0) throw std::invalid_argument("BudgetClock: budget T must be positive");
  if (t < 0 || t >= total) {
    throw std::invalid_argument("BudgetClock: iteration must lie in [0, T)");
  }
}

double eval_schedule(const ScheduleSpec& spec, const BudgetClock& clock) {
  if (spec.kind == ScheduleKind::kSgdrUnaware && spec.bac_origin > 0.0) {
    // t * T0 / T lands exactly on restart boundaries; p * T0 may not.
    const double t = static_cast<double>(clock.t()) * spec.bac_origin /
                     static_cast<double>(clock.total());
    return sgdr_value(spec.t0_period, spec.t_mult, t, spec.eta);
  }
  return eval_schedule_at(spec, clock.progress());
}

double eval_schedule_at(const ScheduleSpec& spec, double p) {
  check_progress(p);
  if (!is_budget_aware(spec)) {
    throw std::invalid_argument("schedule: '" + std::string(to_string(spec.kind)) +
                                "' is budget-unaware; apply bac_convert first");
  }
  switch (spec.kind) {
    case ScheduleKind::kConstant:
      return 1.0;
    case ScheduleKind::kStep:
      return step_decay(spec.drops, p, spec.gamma);
    case ScheduleKind::kExponential:
      return std::exp(p * spec.bac_origin * std::log(spec.gamma));
    case ScheduleKind::kPoly:
      return std::pow(1.0 - p, spec.gamma);
    case ScheduleKind::kCosine:
      return cosine_decay(p, spec.eta);
    case ScheduleKind::kHtd:
      return spec.eta + 0.5 * (1.0 - spec.eta) *
                            (1.0 - std::tanh(spec.lower_l + (spec.upper_u - spec.lower_l) * p));
    case ScheduleKind::kLinear:
      return 1.0 - p;
    case ScheduleKind::kSgdrUnaware:
      return sgdr_value(spec.t0_period, spec.t_mult, p * spec.bac_origin, spec.eta);
    case ScheduleKind::kSgdrAware:
      return sgdr_budget_aware_at(spec.n_restarts, p, spec.eta);
  }
  return 1.0;
}

double eval_unaware(const ScheduleSpec& spec, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("schedule: time must be non-negative");
  if (is_budget_aware(spec) && spec.kind != ScheduleKind::kStep) {
    throw std::invalid_argument("schedule: '" + std::string(to_string(spec.kind)) +
                                "' is budget-aware; eval_unaware needs absolute time");
  }
  switch (spec.kind) {
    case ScheduleKind::kExponential:
      return std::pow(spec.gamma, t);
    case ScheduleKind::kStep:
      if (!spec.drops.empty()) {
        throw std::invalid_argument(
            "schedule: step with progress drops is budget-aware; eval_unaware needs drop "
            "times");
      }
      return step_decay(spec.drop_times, t, spec.gamma);
    case ScheduleKind::kSgdrUnaware:
      return sgdr_value(spec.t0_period, spec.t_mult, t, spec.eta);
    default:
      break;
  }
  throw std::invalid_argument("schedule: unsupported kind for eval_unaware");
}

ScheduleSpec bac_convert(const ScheduleSpec& spec, double original_budget) {
  require(original_budget > 0.0 && std::isfinite(original_budget),
          "BAC original budget must be positive");
  validate(spec);
  if (spec.kind == ScheduleKind::kConstant) return spec;
  if (spec.kind == ScheduleKind::kStep && spec.drops.empty() && spec.drop_times.empty()) {
    return spec;
  }
  if (is_budget_aware(spec)) {
    throw std::invalid_argument("schedule: '" + std::string(to_string(spec.kind)) +
                                "' is already budget-aware");
  }
  ScheduleSpec out = spec;
  switch (spec.kind) {
    case ScheduleKind::kStep:
      out.drop_times.clear();
      for (double time : spec.drop_times) {
        const double d = time / original_budget;
        // Drops at or past the original budget never fire for p < 1.
        if (d < 1.0) out.drops.push_back(d);
      }
      break;
    case ScheduleKind::kExponential:
    case ScheduleKind::kSgdrUnaware:
      out.bac_origin = original_budget;
      break;
    default:
      break;
  }
  return out;
}

ScheduleSpec make_budget_aware(const ScheduleSpec& spec, Conversion conversion,
                               double original_budget, double run_budget) {
  if (is_budget_aware(spec)) return spec;
  return bac_convert(spec, conversion == Conversion::kBac ? original_budget : run_budget);
}

double sgdr_value(double t0_period, double t_mult, double t, double eta) {
  if (!(t >= 0.0)) throw std::invalid_argument("sgdr: t must be non-negative");
  if (!(t0_period > 0.0) || !(t_mult >= 1.0)) {
    throw std::invalid_argument("sgdr: need t0 > 0 and t_mult >= 1");
  }
  double start = 0.0;
  double length = t0_period;
  if (t_mult == 1.0) {
    start = std::floor(t / t0_period) * t0_period;
  } else {
    while (t >= start + length) {
      start += length;
      length *= t_mult;
    }
  }
  const double q = std::clamp((t - start) / length, 0.0, 1.0);
  return cosine_decay(q, eta);
}

double sgdr_budget_aware(std::int64_t n_restarts, const BudgetClock& clock, double eta) {
  return sgdr_budget_aware_at(n_restarts, clock.progress(), eta);
}

double sgdr_budget_aware_at(std::int64_t n_restarts, double p, double eta) {
  require(n_restarts >= 0, "sgdr restarts must be non-negative");
  check_progress(p);
  const double scaled = p * static_cast<double>(n_restarts + 1);
  const double q = scaled - std::floor(scaled);
  return cosine_decay(q, eta);
}

double apply_warmup(const ScheduleSpec& base, std::int64_t warmup_iters,
                    const BudgetClock& clock) {
  if (warmup_iters < 0) throw std::invalid_argument("warm-up: span must be non-negative");
  if (warmup_iters == 0) return eval_schedule(base, clock);
  if (warmup_iters >= clock.total()) {
    throw std::invalid_argument("warm-up: span must be shorter than the budget");
  }
  if (clock.t() < warmup_iters) {
    const double ramp =
        static_cast<double>(clock.t() + 1) / static_cast<double>(warmup_iters);
    return ramp * eval_schedule_at(base, 0.0);
  }
  const double rest = static_cast<double>(clock.total() - warmup_iters);
  return eval_schedule_at(base, static_cast<double>(clock.t() - warmup_iters) / rest);
}

double lr_ratio(const ScheduleSpec& spec, const BudgetClock& clock) {
  return apply_warmup(spec, spec.warmup_iters, clock);
}

namespace {

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::vector<double> parse_list(std::string_view text, std::string_view key) {
  std::vector<double> values;
  if (text.empty()) return values;
  for (auto part : split(text, ',')) values.push_back(parse_double(part, key));
  return values;
}

}  // namespace

std::string format_schedule(const ScheduleSpec& spec) {
  std::ostringstream out;
  out << "kind=" << to_string(spec.kind);
  const auto put = [&](std::string_view key, const std::string& value) {
    out << ' ' << key << '=' << value;
  };
  switch (spec.kind) {
    case ScheduleKind::kStep:
      put("gamma", format_double(spec.gamma));
      if (!spec.drops.empty()) put("drops", join(spec.drops));
      if (!spec.drop_times.empty()) put("drop_times", join(spec.drop_times));
      break;
    case ScheduleKind::kExponential:
      put("gamma", format_double(spec.gamma));
      if (spec.bac_origin > 0.0) put("bac_origin", format_double(spec.bac_origin));
      break;
    case ScheduleKind::kPoly:
      put("gamma", format_double(spec.gamma));
      break;
    case ScheduleKind::kCosine:
      put("eta", format_double(spec.eta));
      break;
    case ScheduleKind::kHtd:
      put("eta", format_double(spec.eta));
      put("L", format_double(spec.lower_l));
      put("U", format_double(spec.upper_u));
      break;
    case ScheduleKind::kSgdrUnaware:
      put("eta", format_double(spec.eta));
      put("t0", format_double(spec.t0_period));
      put("t_mult", format_double(spec.t_mult));
      if (spec.bac_origin > 0.0) put("bac_origin", format_double(spec.bac_origin));
      break;
    case ScheduleKind::kSgdrAware:
      put("eta", format_double(spec.eta));
      put("restarts", std::to_string(spec.n_restarts));
      break;
    default:
      break;
  }
  if (spec.warmup_iters > 0) put("warmup", std::to_string(spec.warmup_iters));
  return out.str();
}

ScheduleSpec parse_schedule(std::string_view text) {
  std::map<std::string, std::string, std::less<>> fields;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("schedule: expected key=value, got '" + token + "'");
    }
    auto key = token.substr(0, eq);
    if (!fields.emplace(key, token.substr(eq + 1)).second) {
      throw std::invalid_argument("schedule: duplicate key '" + key + "'");
    }
  }
  const auto kind_it = fields.find("kind");
  if (kind_it == fields.end()) throw std::invalid_argument("schedule: missing 'kind'");
  ScheduleSpec spec = default_spec(parse_schedule_kind(kind_it->second));
  fields.erase(kind_it);

  for (const auto& [key, value] : fields) {
    if (key == "gamma") {
      spec.gamma = parse_double(value, key);
    } else if (key == "eta") {
      spec.eta = parse_double(value, key);
    } else if (key == "L") {
      spec.lower_l = parse_double(value, key);
    } else if (key == "U") {
      spec.upper_u = parse_double(value, key);
    } else if (key == "drops") {
      spec.drops = parse_list(value, key);
    } else if (key == "drop_times") {
      spec.drop_times = parse_list(value, key);
    } else if (key == "t0") {
      spec.t0_period = parse_double(value, key);
    } else if (key == "t_mult") {
      spec.t_mult = parse_double(value, key);
    } else if (key == "restarts") {
      spec.n_restarts = parse_int(value, key);
    } else if (key == "bac_origin") {
      spec.bac_origin = parse_double(value, key);
    } else if (key == "warmup") {
      spec.warmup_iters = parse_int(value, key);
    } else {
      throw std::invalid_argument("schedule: unknown key '" + key + "'");
    }
  }
  validate(spec);
  return spec;
}

}  // namespace budgeted
