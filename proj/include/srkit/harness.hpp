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

// Desk-scale numerical experiments.
//
// Stream convention: trial t reads its input data from
// derive_stream(seed, t), so every mode sees the same inputs. Rounding
// draws for mode index m at r random bits come from
// derive_stream(seed, 2^63 | m << 40 | r << 32 | t). Recursive kernels
// (sum_growth, dot, r_sweep) make one pass and record every n of the grid
// on the way; the others restart that stream for each n. Rows are emitted
// cell by cell, trials in increasing order, so the thread count never
// shows up in the output.

#ifndef SRKIT_HARNESS_HPP_
#define SRKIT_HARNESS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "srkit/format.hpp"
#include "srkit/kernels.hpp"
#include "srkit/working_real.hpp"

namespace srkit {

/// No rounding at all: the exact WorkingReal computation.
struct NoRounding {};

struct Mode {
  std::string label;
  std::variant<NoRounding, RoundingMode, SrConfig> rounding;
};

/// Accepts "none", "rne", "rz", "ru", "rd", "sr" (or "exact-sr"),
/// "limited:R", "limited:R:rne", "a:R", "b:R", "c:R". Throws ParseError.
Mode parse_mode(std::string_view text);

enum class ExperimentKind { stagnation, sum_growth, dot, horner, pairwise, r_sweep, gd, pi_demo };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::sum_growth;
  FloatFormat fmt;
  /// Problem size: steps, length, polynomial degree or GD dimension.
  std::uint64_t n = 4096;
  /// Overrides n when non-empty (sum_growth, dot, horner, pairwise).
  std::vector<std::uint64_t> n_grid;
  /// r_sweep only. r = 0 means the deterministic intermediate mode.
  std::vector<unsigned> r_grid;
  std::uint64_t trials = 10;
  /// Empty selects the defaults for the kind.
  std::vector<Mode> modes;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  // stagnation
  WorkingReal acc0 = WorkingReal::from_int(1);
  WorkingReal delta = WorkingReal::pow2(-13);
  // pairwise (and sum_growth): use this addend everywhere instead of
  // uniform draws.
  std::optional<WorkingReal> constant_addend;
  // horner
  WorkingReal eval_point = parse_working_real("0.99").value;
  // r_sweep
  Intermediate intermediate = Intermediate::truncate;
  // gd
  WorkingReal step = WorkingReal::pow2(-4);
  std::uint64_t iterations = 2000;

  /// Throws ContractError for trials == 0, n == 0 and similar.
  void validate() const;
};

/// Default fields with the given kind and binary16.
ExperimentSpec default_spec(ExperimentKind kind);

struct ResultRow {
  std::string mode;
  std::uint64_t n = 0;
  unsigned r = 0;
  std::uint64_t trial = 0;
  WorkingReal final_value;
  WorkingReal exact;
  double abs_err = 0;
  double rel_err = 0;
  bool diverged = false;
};

struct SummaryCell {
  std::string mode;
  std::uint64_t n = 0;
  unsigned r = 0;
  std::uint64_t trials = 0;
  double median_rel_err = 0;
  double mean_rel_err = 0;
  double std_rel_err = 0;
  double median_abs_err = 0;
  double mean_final = 0;
  std::uint64_t diverged = 0;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::sum_growth;
  std::string fmt;
  std::uint64_t seed = 0;
  std::vector<ResultRow> rows;
  std::vector<SummaryCell> summary;
  /// Least-squares slope of log(median rel_err) against log(n), for modes
  /// with at least five grid points of nonzero error.
  std::map<std::string, double> slopes;
  /// r_sweep: ceil(log2(n) / 2).
  std::optional<unsigned> heuristic_r;
  /// r_sweep: smallest r whose median error is within 2x of the median at
  /// the largest r of the grid.
  std::optional<unsigned> knee_r;

  /// Header mode,n,r,trial,final,exact,abs_err,rel_err. final and exact are
  /// hex-floats; the errors use `digits` significant decimal digits.
  std::string to_csv(int digits = 17) const;
  std::string summary_json(int indent = 2) const;

  const SummaryCell* cell(std::string_view mode, std::uint64_t n, unsigned r) const;
};

// acc <- round(acc + delta), n times; the reference is acc0 + n * delta.
ExperimentResult run_stagnation(const ExperimentSpec& spec);
ExperimentResult run_sum_growth(const ExperimentSpec& spec);
ExperimentResult run_r_sweep(const ExperimentSpec& spec);
/// dot: s <- round(s + round(a_i * b_i)); horner: s <- round(round(s * x) + c_i)
/// with degree n; pairwise: balanced-tree summation.
ExperimentResult run_kernel_experiment(const ExperimentSpec& spec);
/// Gradient descent on f(w) = |w - w*|^2 / 2 in dimension n:
/// w <- round(w - round(step * round(w - w*))), starting at w = 0.
/// final is |w - w*|^2 (exact), the reference is 0, abs_err is |w - w*| and
/// rel_err is |w - w*| / |w*|. A squared norm above 10^12 stops the trial
/// and marks it diverged.
ExperimentResult run_gd(const ExperimentSpec& spec);

/// Dispatches on spec.kind. pi_demo has no rows; use run_pi_demo.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Rounding 3.14159265358979323846 to four significant decimal digits,
/// in base-10 integer arithmetic.
struct PiDemoReport {
  std::string x = "3.14159265358979323846";
  std::string lo;
  std::string hi;
  /// q as an exact decimal fraction.
  std::string q_numerator;
  std::string q_denominator;
  std::string q_decimal;
  std::string up_error;
  std::string down_error;
  /// lo + q * (hi - lo); equals x.
  std::string expected_sr;
  /// Decimal digits of randomness needed for exact SR of x.
  unsigned random_digits = 0;

  std::string text() const;
  std::string to_json(int indent = 2) const;
};

PiDemoReport run_pi_demo();

}  // namespace srkit

#endif  // SRKIT_HARNESS_HPP_
