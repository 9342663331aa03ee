// Copyright 2026 The srkit Authors
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

#include "srkit/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "srkit/entropy.hpp"
#include "srkit/error.hpp"
#include "srkit/grid.hpp"

namespace srkit {

namespace {

using RoundingChoice = std::variant<NoRounding, RoundingMode, SrConfig>;

std::string lower(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

unsigned parse_unsigned(const std::string& text, std::string_view what) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
      }) || text.size() > 9) {
    throw ParseError("bad " + std::string(what) + " '" + text + "'");
  }
  return static_cast<unsigned>(std::stoul(text));
}

unsigned random_bits_of(const RoundingChoice& rc) {
  if (const auto* cfg = std::get_if<SrConfig>(&rc)) return cfg->r;
  return 0;
}

WorkingReal round_with(const FloatFormat& fmt, const WorkingReal& x, const RoundingChoice& rc,
                       BitSource& bits) {
  if (std::holds_alternative<NoRounding>(rc)) return x;
  if (const auto* mode = std::get_if<RoundingMode>(&rc)) return round_deterministic(fmt, x, *mode);
  return apply_rounding(fmt, x, std::get<SrConfig>(rc), bits);
}

// Uniform (0,1) draws, rounded to nearest into fmt.
std::vector<WorkingReal> uniform_inputs(const FloatFormat& fmt, BitSource& src, std::size_t count) {
  std::vector<WorkingReal> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(round_deterministic(fmt, uniform_open01(src), RoundingMode::rne));
  }
  return out;
}

Xoroshiro128Plus rounding_stream(std::uint64_t seed, std::size_t mode_index, unsigned r,
                                 std::uint64_t trial) {
  const std::uint64_t id = (std::uint64_t{1} << 63) |
                           (static_cast<std::uint64_t>(mode_index & 0x7FFFFF) << 40) |
                           (static_cast<std::uint64_t>(r & 0xFF) << 32) | (trial & 0xFFFFFFFF);
  return derive_stream(seed, id);
}

struct Cell {
  std::string mode;
  std::size_t mode_index = 0;
  RoundingChoice rounding;
  std::uint64_t n = 0;
  unsigned r = 0;
};

struct Outcome {
  WorkingReal final_value;
  WorkingReal exact;
  std::optional<double> abs_err;
  std::optional<double> rel_err;
  bool diverged = false;
};

// Runs body(trial) for every trial over `threads` workers. body must only
// write to state owned by its trial.
void for_each_trial(std::uint64_t trials, unsigned threads,
                    const std::function<void(std::uint64_t)>& body) {
  const unsigned workers =
      static_cast<unsigned>(std::clamp<std::uint64_t>(threads == 0 ? 1 : threads, 1, trials));
  if (workers == 1) {
    for (std::uint64_t t = 0; t < trials; ++t) body(t);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t t = w; t < trials; t += workers) body(t);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

ResultRow make_row(const Cell& cell, std::uint64_t trial, const Outcome& o) {
  ResultRow row;
  row.mode = cell.mode;
  row.n = cell.n;
  row.r = cell.r;
  row.trial = trial;
  row.final_value = o.final_value;
  row.exact = o.exact;
  row.diverged = o.diverged;
  if (o.abs_err) {
    row.abs_err = *o.abs_err;
    row.rel_err = o.rel_err.value_or(0);
    return row;
  }
  const WorkingReal diff = (o.final_value - o.exact).abs();
  row.abs_err = to_double(diff);
  if (o.exact.is_zero()) {
    row.rel_err = diff.is_zero() ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    row.rel_err = row.abs_err / to_double(o.exact.abs());
  }
  return row;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::optional<double> fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 5) return std::nullopt;
  double sx = 0, sy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  const double k = static_cast<double>(points.size());
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0) return std::nullopt;
  return sxy / sxx;
}

// Runs every trial and assembles rows cell-major. trial_fn fills one
// Outcome per cell.
ExperimentResult collect(const ExperimentSpec& spec, const std::vector<Cell>& cells,
                         const std::function<void(std::uint64_t, std::vector<Outcome>&)>& trial_fn) {
  std::vector<std::vector<Outcome>> per_trial(spec.trials, std::vector<Outcome>(cells.size()));
  for_each_trial(spec.trials, spec.threads,
                 [&](std::uint64_t t) { trial_fn(t, per_trial[t]); });

  ExperimentResult res;
  res.kind = spec.kind;
  res.fmt = spec.fmt.name;
  res.seed = spec.seed;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SummaryCell s;
    s.mode = cells[c].mode;
    s.n = cells[c].n;
    s.r = cells[c].r;
    s.trials = spec.trials;
    std::vector<double> rel, abs;
    double sum_final = 0;
    for (std::uint64_t t = 0; t < spec.trials; ++t) {
      const ResultRow row = make_row(cells[c], t, per_trial[t][c]);
      rel.push_back(row.rel_err);
      abs.push_back(row.abs_err);
      sum_final += to_double(row.final_value);
      if (row.diverged) ++s.diverged;
      res.rows.push_back(row);
    }
    const double k = static_cast<double>(spec.trials);
    s.median_rel_err = median(rel);
    s.median_abs_err = median(abs);
    s.mean_final = sum_final / k;
    double sum = 0;
    for (double v : rel) sum += v;
    s.mean_rel_err = sum / k;
    double ss = 0;
    for (double v : rel) ss += (v - s.mean_rel_err) * (v - s.mean_rel_err);
    s.std_rel_err = spec.trials > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
    res.summary.push_back(s);
  }

  std::map<std::string, std::vector<std::pair<double, double>>> points;
  for (const auto& s : res.summary) {
    if (s.median_rel_err > 0 && std::isfinite(s.median_rel_err)) {
      points[s.mode].emplace_back(std::log(static_cast<double>(s.n)), std::log(s.median_rel_err));
    }
  }
  for (const auto& [mode, pts] : points) {
    std::set<double> distinct_n;
    for (const auto& p : pts) distinct_n.insert(p.first);
    if (distinct_n.size() != pts.size()) continue;
    if (auto slope = fit_slope(pts)) res.slopes[mode] = *slope;
  }
  return res;
}

std::vector<Mode> modes_for(const ExperimentSpec& spec) {
  if (!spec.modes.empty()) return spec.modes;
  std::vector<Mode> m = {parse_mode("rne"), parse_mode("sr")};
  if (spec.kind == ExperimentKind::gd) m.push_back(parse_mode("none"));
  return m;
}

std::vector<std::uint64_t> grid_of(const ExperimentSpec& spec) {
  std::vector<std::uint64_t> g = spec.n_grid.empty() ? std::vector<std::uint64_t>{spec.n}
                                                     : spec.n_grid;
  return g;
}

// One recursive pass per mode, recording the state after each grid size:
// s = t_0, s = round(s + t_i), where t_i = term(inputs, i) is itself
// rounded first when round_term is set.
ExperimentResult run_recursive(
    const ExperimentSpec& spec, const std::vector<Mode>& modes, bool round_term,
    const std::vector<RoundingChoice>& roundings,
    const std::function<std::vector<WorkingReal>(std::uint64_t, Xoroshiro128Plus&)>& inputs,
    const std::function<WorkingReal(const std::vector<WorkingReal>&, std::uint64_t)>& term) {
  const std::vector<std::uint64_t> grid = grid_of(spec);
  const std::uint64_t nmax = *std::max_element(grid.begin(), grid.end());
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    for (std::uint64_t n : grid) {
      cells.push_back({modes[m].label, m, roundings[m], n, random_bits_of(roundings[m])});
    }
  }
  return collect(spec, cells, [&](std::uint64_t t, std::vector<Outcome>& out) {
    Xoroshiro128Plus data = derive_stream(spec.seed, t);
    const std::vector<WorkingReal> in = inputs(nmax, data);
    std::vector<WorkingReal> exact_at(nmax + 1);
    WorkingReal exact;
    for (std::uint64_t i = 0; i < nmax; ++i) {
      exact = exact + term(in, i);
      exact_at[i + 1] = exact;
    }
    for (std::size_t m = 0; m < modes.size(); ++m) {
      Xoroshiro128Plus bits = rounding_stream(spec.seed, m, random_bits_of(roundings[m]), t);
      std::vector<WorkingReal> state_at(nmax + 1);
      auto next_term = [&](std::uint64_t i) {
        return round_term ? round_with(spec.fmt, term(in, i), roundings[m], bits) : term(in, i);
      };
      WorkingReal s = next_term(0);
      state_at[1] = s;
      for (std::uint64_t i = 1; i < nmax; ++i) {
        s = round_with(spec.fmt, s + next_term(i), roundings[m], bits);
        state_at[i + 1] = s;
      }
      for (std::size_t g = 0; g < grid.size(); ++g) {
        out[m * grid.size() + g] = {state_at[grid[g]], exact_at[grid[g]], {}, {}, false};
      }
    }
  });
}

std::string scaled_decimal(const BigInt& v, unsigned scale) {
  const bool neg = v < 0;
  BigInt mag = neg ? BigInt(-v) : v;
  std::string digits = mag.str();
  if (digits.size() <= scale) digits.insert(0, scale + 1 - digits.size(), '0');
  std::string int_part = digits.substr(0, digits.size() - scale);
  std::string frac = digits.substr(digits.size() - scale);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = (neg ? "-" : "") + int_part;
  if (!frac.empty()) out += "." + frac;
  return out;
}

}  // namespace

Mode parse_mode(std::string_view text) {
  const std::string s = lower(text);
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  Mode mode;
  mode.label = s;
  const std::string& head = parts[0];
  if (parts.size() == 1) {
    if (head == "none") {
      mode.rounding = NoRounding{};
    } else if (head == "sr" || head == "exact-sr" || head == "exact") {
      mode.rounding = SrConfig::exact_sr();
    } else {
      try {
        mode.rounding = parse_rounding_mode(head);
      } catch (const ContractError&) {
        throw ParseError("bad mode '" + std::string(text) + "'");
      }
    }
    return mode;
  }
  const unsigned r = parse_unsigned(parts[1], "random bit count");
  SrConfig cfg;
  try {
    if (head == "limited") {
      Intermediate im = Intermediate::truncate;
      if (parts.size() == 3) {
        im = parse_intermediate(parts[2]);
      } else if (parts.size() > 3) {
        throw ParseError("bad mode '" + std::string(text) + "'");
      }
      cfg = SrConfig::limited(r, im);
    } else if (parts.size() == 2 && (head == "a" || head == "b" || head == "c")) {
      const SrVariant v = head == "a"   ? SrVariant::p3109_a
                          : head == "b" ? SrVariant::p3109_b
                                        : SrVariant::p3109_c;
      cfg = SrConfig::p3109(v, r);
    } else {
      throw ParseError("bad mode '" + std::string(text) + "'");
    }
    cfg.validate();
  } catch (const ContractError& e) {
    throw ParseError("bad mode '" + std::string(text) + "': " + e.what());
  }
  mode.rounding = cfg;
  return mode;
}

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::stagnation: return "stagnation";
    case ExperimentKind::sum_growth: return "sum_growth";
    case ExperimentKind::dot: return "dot";
    case ExperimentKind::horner: return "horner";
    case ExperimentKind::pairwise: return "pairwise";
    case ExperimentKind::r_sweep: return "r_sweep";
    case ExperimentKind::gd: return "gd";
    case ExperimentKind::pi_demo: return "pi_demo";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  std::string s = lower(text);
  std::replace(s.begin(), s.end(), '-', '_');
  for (auto k : {ExperimentKind::stagnation, ExperimentKind::sum_growth, ExperimentKind::dot,
                 ExperimentKind::horner, ExperimentKind::pairwise, ExperimentKind::r_sweep,
                 ExperimentKind::gd, ExperimentKind::pi_demo}) {
    if (s == to_string(k)) return k;
  }
  throw ParseError("unknown experiment '" + std::string(text) + "'");
}

void ExperimentSpec::validate() const {
  fmt.validate();
  if (trials == 0) throw ContractError("trials must be at least 1");
  if (n == 0) throw ContractError("n must be at least 1");
  for (auto v : n_grid) {
    if (v == 0) throw ContractError("n-grid entries must be at least 1");
  }
  for (auto r : r_grid) {
    if (r > kMaxRandomBits) throw ContractError("r-grid entries must be at most 64");
  }
  if (kind == ExperimentKind::r_sweep && r_grid.empty()) {
    throw ContractError("r_sweep needs a non-empty r-grid");
  }
  if (!acc0.is_finite() || !delta.is_finite() || !step.is_finite() || !eval_point.is_finite()) {
    throw ContractError("experiment parameters must be finite");
  }
}

ExperimentSpec default_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  s.fmt = formats::binary16();
  switch (kind) {
    case ExperimentKind::stagnation:
      s.trials = 100;
      break;
    case ExperimentKind::sum_growth:
      for (unsigned k = 8; k <= 14; ++k) s.n_grid.push_back(std::uint64_t{1} << k);
      break;
    case ExperimentKind::r_sweep:
      s.r_grid = {0, 2, 4, 6, 8, 10, 12, 16, 24};
      s.trials = 20;
      break;
    case ExperimentKind::dot:
    case ExperimentKind::pairwise:
      s.n = 1024;
      break;
    case ExperimentKind::horner:
      s.n = 64;
      break;
    case ExperimentKind::gd:
      s.n = 16;
      break;
    case ExperimentKind::pi_demo:
      s.trials = 1;
      s.n = 1;
      break;
  }
  return s;
}

const SummaryCell* ExperimentResult::cell(std::string_view mode, std::uint64_t n,
                                          unsigned r) const {
  for (const auto& c : summary) {
    if (c.mode == mode && c.n == n && c.r == r) return &c;
  }
  return nullptr;
}

std::string ExperimentResult::to_csv(int digits) const {
  std::ostringstream os;
  os << "mode,n,r,trial,final,exact,abs_err,rel_err\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return std::string(buf);
  };
  for (const auto& row : rows) {
    os << row.mode << ',' << row.n << ',' << row.r << ',' << row.trial << ','
       << row.final_value.to_hex() << ',' << row.exact.to_hex() << ',' << num(row.abs_err) << ','
       << num(row.rel_err) << '\n';
  }
  return os.str();
}

std::string ExperimentResult::summary_json(int indent) const {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(kind));
  j["fmt"] = fmt;
  j["seed"] = seed;
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : summary) {
    nlohmann::ordered_json e;
    e["mode"] = c.mode;
    e["n"] = c.n;
    e["r"] = c.r;
    e["trials"] = c.trials;
    e["median_rel_err"] = c.median_rel_err;
    e["mean_rel_err"] = c.mean_rel_err;
    e["std_rel_err"] = c.std_rel_err;
    e["median_abs_err"] = c.median_abs_err;
    e["mean_final"] = c.mean_final;
    e["diverged"] = c.diverged;
    j["cells"].push_back(e);
  }
  j["slopes"] = nlohmann::ordered_json::object();
  for (const auto& [mode, slope] : slopes) j["slopes"][mode] = slope;
  if (heuristic_r) j["heuristic_r"] = *heuristic_r;
  if (knee_r) j["knee_r"] = *knee_r;
  return j.dump(indent);
}

ExperimentResult run_stagnation(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<Mode> modes = modes_for(spec);
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    cells.push_back({modes[m].label, m, modes[m].rounding, spec.n,
                     random_bits_of(modes[m].rounding)});
  }
  const WorkingReal exact =
      spec.acc0 + spec.delta * WorkingReal::from_int(static_cast<std::int64_t>(spec.n));
  return collect(spec, cells, [&](std::uint64_t t, std::vector<Outcome>& out) {
    for (std::size_t m = 0; m < cells.size(); ++m) {
      Xoroshiro128Plus bits = rounding_stream(spec.seed, m, cells[m].r, t);
      WorkingReal acc = round_with(spec.fmt, spec.acc0, cells[m].rounding, bits);
      for (std::uint64_t i = 0; i < spec.n; ++i) {
        acc = round_with(spec.fmt, acc + spec.delta, cells[m].rounding, bits);
      }
      out[m] = {acc, exact, {}, {}, false};
    }
  });
}

ExperimentResult run_sum_growth(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<Mode> modes = modes_for(spec);
  std::vector<RoundingChoice> roundings;
  for (const auto& m : modes) roundings.push_back(m.rounding);
  return run_recursive(
      spec, modes, false, roundings,
      [&](std::uint64_t count, Xoroshiro128Plus& data) {
        if (spec.constant_addend) return std::vector<WorkingReal>(count, *spec.constant_addend);
        return uniform_inputs(spec.fmt, data, count);
      },
      [](const std::vector<WorkingReal>& in, std::uint64_t i) { return in[i]; });
}

ExperimentResult run_r_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const std::string label =
      spec.intermediate == Intermediate::truncate ? "limited" : "limited-rne";
  // One "mode" per r so each gets its own stream and summary cell.
  ExperimentSpec single = spec;
  single.n_grid.clear();
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < spec.r_grid.size(); ++k) {
    const unsigned r = spec.r_grid[k];
    RoundingChoice rc;
    if (r == 0) {
      rc = spec.intermediate == Intermediate::truncate ? RoundingMode::rz : RoundingMode::rne;
    } else {
      rc = SrConfig::limited(r, spec.intermediate);
    }
    cells.push_back({label, 0, rc, spec.n, r});
  }
  ExperimentResult res = collect(spec, cells, [&](std::uint64_t t, std::vector<Outcome>& out) {
    Xoroshiro128Plus data = derive_stream(spec.seed, t);
    const std::vector<WorkingReal> in =
        spec.constant_addend ? std::vector<WorkingReal>(spec.n, *spec.constant_addend)
                             : uniform_inputs(spec.fmt, data, spec.n);
    WorkingReal exact;
    for (const auto& a : in) exact = exact + a;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      Xoroshiro128Plus bits = rounding_stream(spec.seed, 0, cells[c].r, t);
      WorkingReal s = in[0];
      for (std::uint64_t i = 1; i < spec.n; ++i) {
        s = round_with(spec.fmt, s + in[i], cells[c].rounding, bits);
      }
      out[c] = {s, exact, {}, {}, false};
    }
  });
  res.heuristic_r = static_cast<unsigned>(std::ceil(std::log2(static_cast<double>(spec.n)) / 2));
  unsigned r_top = 0;
  const SummaryCell* top = nullptr;
  for (const auto& c : res.summary) {
    if (top == nullptr || c.r > r_top) {
      top = &c;
      r_top = c.r;
    }
  }
  std::optional<unsigned> knee;
  for (const auto& c : res.summary) {
    if (c.median_abs_err <= 2 * top->median_abs_err && (!knee || c.r < *knee)) knee = c.r;
  }
  res.knee_r = knee;
  return res;
}

ExperimentResult run_kernel_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<Mode> modes = modes_for(spec);
  std::vector<RoundingChoice> roundings;
  for (const auto& m : modes) roundings.push_back(m.rounding);

  if (spec.kind == ExperimentKind::dot) {
    // Inputs are interleaved a_0, b_0, a_1, b_1, ... so that every prefix
    // of the stream is a shorter problem.
    return run_recursive(
        spec, modes, true, roundings,
        [&](std::uint64_t count, Xoroshiro128Plus& data) {
          return uniform_inputs(spec.fmt, data, 2 * count);
        },
        [](const std::vector<WorkingReal>& in, std::uint64_t i) {
          return in[2 * i] * in[2 * i + 1];
        });
  }
  if (spec.kind != ExperimentKind::horner && spec.kind != ExperimentKind::pairwise) {
    throw ContractError("not a kernel experiment: " + std::string(to_string(spec.kind)));
  }

  const std::vector<std::uint64_t> grid = grid_of(spec);
  const std::uint64_t nmax = *std::max_element(grid.begin(), grid.end());
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    for (std::uint64_t n : grid) {
      cells.push_back({modes[m].label, m, roundings[m], n, random_bits_of(roundings[m])});
    }
  }
  const bool horner = spec.kind == ExperimentKind::horner;
  const WorkingReal x = round_deterministic(spec.fmt, spec.eval_point, RoundingMode::rne);

  return collect(spec, cells, [&](std::uint64_t t, std::vector<Outcome>& out) {
    Xoroshiro128Plus data = derive_stream(spec.seed, t);
    const std::uint64_t count = horner ? nmax + 1 : nmax;
    const std::vector<WorkingReal> in =
        spec.constant_addend ? std::vector<WorkingReal>(count, *spec.constant_addend)
                             : uniform_inputs(spec.fmt, data, count);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Cell& cell = cells[c];
      const std::uint64_t n = cell.n;
      Xoroshiro128Plus bits = rounding_stream(spec.seed, cell.mode_index, cell.r, t);
      WorkingReal value, exact;
      if (horner) {
        // Degree n: coefficients c_0..c_n, evaluated from the top.
        value = in[n];
        exact = in[n];
        for (std::uint64_t i = n; i-- > 0;) {
          value = round_with(spec.fmt, round_with(spec.fmt, value * x, cell.rounding, bits) + in[i],
                             cell.rounding, bits);
          exact = exact * x + in[i];
        }
      } else {
        std::function<WorkingReal(std::uint64_t, std::uint64_t)> tree =
            [&](std::uint64_t lo, std::uint64_t hi) -> WorkingReal {
          if (hi - lo == 1) return in[lo];
          const std::uint64_t mid = lo + (hi - lo) / 2;
          const WorkingReal left = tree(lo, mid);
          return round_with(spec.fmt, left + tree(mid, hi), cell.rounding, bits);
        };
        value = tree(0, n);
        for (std::uint64_t i = 0; i < n; ++i) exact = exact + in[i];
      }
      out[c] = {value, exact, {}, {}, false};
    }
  });
}

ExperimentResult run_gd(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<Mode> modes = modes_for(spec);
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    cells.push_back({modes[m].label, m, modes[m].rounding, spec.n,
                     random_bits_of(modes[m].rounding)});
  }
  constexpr double kDivergedSquaredNorm = 1e12;
  const std::uint64_t d = spec.n;
  return collect(spec, cells, [&](std::uint64_t t, std::vector<Outcome>& out) {
    Xoroshiro128Plus data = derive_stream(spec.seed, t);
    const std::vector<WorkingReal> target = uniform_inputs(spec.fmt, data, d);
    double target_norm2 = 0;
    for (const auto& v : target) target_norm2 += to_double(v * v);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Cell& cell = cells[c];
      Xoroshiro128Plus bits = rounding_stream(spec.seed, cell.mode_index, cell.r, t);
      const WorkingReal step = std::holds_alternative<NoRounding>(cell.rounding)
                                   ? spec.step
                                   : round_deterministic(spec.fmt, spec.step, RoundingMode::rne);
      std::vector<WorkingReal> w(d);
      bool diverged = false;
      for (std::uint64_t it = 0; it < spec.iterations && !diverged; ++it) {
        for (std::uint64_t i = 0; i < d; ++i) {
          const WorkingReal g = round_with(spec.fmt, w[i] - target[i], cell.rounding, bits);
          const WorkingReal s = round_with(spec.fmt, step * g, cell.rounding, bits);
          w[i] = round_with(spec.fmt, w[i] - s, cell.rounding, bits);
        }
        if (it % 16 == 15) {
          double norm2 = 0;
          for (std::uint64_t i = 0; i < d; ++i) {
            const double e = to_double(w[i] - target[i]);
            norm2 += e * e;
          }
          diverged = !(norm2 <= kDivergedSquaredNorm);
        }
      }
      WorkingReal dist2;
      for (std::uint64_t i = 0; i < d; ++i) {
        const WorkingReal e = w[i] - target[i];
        dist2 = dist2 + e * e;
      }
      const double dist = std::sqrt(to_double(dist2));
      if (!(to_double(dist2) <= kDivergedSquaredNorm)) diverged = true;
      const double rel = target_norm2 > 0 ? dist / std::sqrt(target_norm2)
                                          : (dist == 0 ? 0.0 : std::numeric_limits<double>::infinity());
      out[c] = {dist2, WorkingReal{}, dist, rel, diverged};
    }
  });
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::stagnation: return run_stagnation(spec);
    case ExperimentKind::sum_growth: return run_sum_growth(spec);
    case ExperimentKind::r_sweep: return run_r_sweep(spec);
    case ExperimentKind::dot:
    case ExperimentKind::horner:
    case ExperimentKind::pairwise: return run_kernel_experiment(spec);
    case ExperimentKind::gd: return run_gd(spec);
    case ExperimentKind::pi_demo: break;
  }
  throw ContractError("pi_demo has no result rows; use run_pi_demo");
}

std::string PiDemoReport::text() const {
  std::ostringstream os;
  os << "x            = " << x << '\n'
     << "candidates   = " << lo << ", " << hi << '\n'
     << "q            = " << q_numerator << '/' << q_denominator << " = " << q_decimal << '\n'
     << "P(round up)  = " << q_decimal << '\n'
     << "up error     = +" << up_error << '\n'
     << "down error   = " << down_error << '\n'
     << "E[SR(x)]     = " << expected_sr << '\n'
     << "exact SR needs " << random_digits << " random decimal digits\n";
  return os.str();
}

std::string PiDemoReport::to_json(int indent) const {
  nlohmann::ordered_json j;
  j["x"] = x;
  j["lo"] = lo;
  j["hi"] = hi;
  j["q"] = q_numerator + "/" + q_denominator;
  j["q_decimal"] = q_decimal;
  j["up_error"] = "+" + up_error;
  j["down_error"] = down_error;
  j["expected_sr"] = expected_sr;
  j["random_digits"] = random_digits;
  return j.dump(indent);
}

PiDemoReport run_pi_demo() {
  // Everything is an integer count of 10^-20.
  constexpr unsigned kScale = 20;
  const BigInt x("314159265358979323846");
  // Four significant digits of a number in [1, 10): step 10^-3.
  const BigInt step = boost::multiprecision::pow(BigInt(10), kScale - 3);
  const BigInt lo = x / step * step;
  const BigInt hi = lo + step;
  const BigInt rem = x - lo;

  PiDemoReport rep;
  rep.x = scaled_decimal(x, kScale);
  rep.lo = scaled_decimal(lo, kScale);
  rep.hi = scaled_decimal(hi, kScale);
  // Kept unreduced so the denominator shows the decimal grid.
  rep.q_numerator = rem.str();
  rep.q_denominator = step.str();
  rep.q_decimal = scaled_decimal(rem, kScale - 3);
  rep.up_error = scaled_decimal(hi - x, kScale);
  rep.down_error = scaled_decimal(lo - x, kScale);
  // lo + (rem / step) * step, kept as an integer.
  rep.expected_sr = scaled_decimal(lo + rem, kScale);
  rep.random_digits = static_cast<unsigned>(BigInt(step - 1).str().size());
  return rep;
}

}  // namespace srkit
