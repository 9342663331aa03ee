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

#include "srkit/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "srkit/block.hpp"
#include "srkit/entropy.hpp"
#include "srkit/error.hpp"
#include "srkit/format.hpp"
#include "srkit/grid.hpp"
#include "srkit/harness.hpp"
#include "srkit/kernels.hpp"
#include "srkit/oracle.hpp"
#include "srkit/profiles.hpp"
#include "srkit/working_real.hpp"

namespace srkit::cli {

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string> kModes = {"rne", "rz", "ru", "rd"};
const std::vector<std::string> kVariants = {"exact", "limited", "a", "b", "c"};
const std::vector<std::string> kIntermediates = {"rz", "rne"};
const std::vector<std::string> kOutputs = {"text", "json", "csv"};

std::uint64_t parse_seed(const std::string& text) {
  const bool hex = text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
  const std::string body = hex ? text.substr(2) : text;
  if (body.empty() || body.size() > (hex ? 16u : 20u)) throw ParseError("bad seed '" + text + "'");
  for (char c : body) {
    if (!(hex ? std::isxdigit(static_cast<unsigned char>(c)) : std::isdigit(static_cast<unsigned char>(c)))) {
      throw ParseError("bad seed '" + text + "'");
    }
  }
  errno = 0;
  const unsigned long long v = std::strtoull(body.c_str(), nullptr, hex ? 16 : 10);
  if (errno == ERANGE) throw ParseError("seed out of range '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

WorkingReal value_of(const std::string& text) { return parse_working_real(text).value; }

int hex_digits(const FloatFormat& fmt) { return (fmt.precision - 1 + 3) / 4; }

std::string show(const FloatFormat& fmt, const WorkingReal& v, std::optional<int> digits) {
  if (digits && v.is_finite()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", *digits, to_double(v));
    return buf;
  }
  return v.to_hex(hex_digits(fmt));
}

std::string bits_hex(const FloatFormat& fmt, std::uint64_t bits) {
  const auto layout = fmt.layout();
  const int width = layout ? (layout->total_bits() + 3) / 4 : 16;
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%0*llx", width, static_cast<unsigned long long>(bits));
  return buf;
}

// Options shared by the commands that take a rounding descriptor.
struct RoundingOptions {
  std::string mode;
  std::string variant;
  unsigned r = 0;
  std::string intermediate;
  std::string overflow = "saturate";
  std::string flush_below;

  void add(CLI::App* cmd, bool with_mode) {
    if (with_mode) {
      cmd->add_option("--mode", mode, "deterministic mode")->check(CLI::IsMember(kModes));
    }
    cmd->add_option("--variant", variant, "stochastic variant")->check(CLI::IsMember(kVariants));
    cmd->add_option("--r", r, "random bits for fixed-width variants")->check(CLI::Range(0, 64));
    cmd->add_option("--intermediate", intermediate, "limited-SR intermediate rounding")
        ->check(CLI::IsMember(kIntermediates));
    cmd->add_option("--overflow", overflow, "saturate or infinity")
        ->check(CLI::IsMember({"saturate", "infinity"}));
    cmd->add_option("--flush-below", flush_below, "flush |x| below this to zero");
  }

  SrConfig sr_config(const std::string& default_variant) const {
    const SrVariant v = parse_sr_variant(variant.empty() ? default_variant : variant);
    SrConfig cfg;
    cfg.variant = v;
    cfg.r = v == SrVariant::exact ? 0 : r;
    if (!intermediate.empty()) {
      if (v != SrVariant::limited) throw ContractError("--intermediate applies to --variant limited");
      cfg.intermediate = parse_intermediate(intermediate);
    } else if (v == SrVariant::limited) {
      cfg.intermediate = Intermediate::truncate;
    }
    cfg.overflow = overflow == "infinity" ? OverflowPolicy::infinity : OverflowPolicy::saturate;
    if (!flush_below.empty()) cfg.flush_below = value_of(flush_below);
    cfg.validate();
    return cfg;
  }

  Rounding rounding(const std::string& default_mode) const {
    if (!mode.empty() && !variant.empty()) throw ContractError("give --mode or --variant, not both");
    if (!variant.empty()) return sr_config("exact");
    return parse_rounding_mode(mode.empty() ? default_mode : mode);
  }
};

struct Common {
  std::string seed;
  std::string format = "text";
  bool pretty = false;
  std::optional<int> digits;

  std::uint64_t seed_value() const {
    if (!seed.empty()) return parse_seed(seed);
    if (const char* env = std::getenv("SRKIT_SEED"); env != nullptr && *env != '\0') {
      return parse_seed(env);
    }
    return 0;
  }
  int indent() const { return pretty ? 2 : -1; }
};

void add_seed(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "64-bit seed, decimal or 0x-hex (default $SRKIT_SEED or 0)");
}

void add_output(CLI::App* cmd, Common& c, std::vector<std::string> allowed = {"text", "json"}) {
  cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember(allowed));
  cmd->add_flag("--pretty", c.pretty, "indent JSON output");
}

void add_digits(CLI::App* cmd, Common& c) {
  cmd->add_option("--digits", c.digits, "print decimals with this many significant digits")
      ->check(CLI::Range(1, 40));
}

const ProfileRegistry& registry_for(const std::string& path, std::unique_ptr<ProfileRegistry>& holder) {
  if (path.empty()) return ProfileRegistry::builtin();
  holder = std::make_unique<ProfileRegistry>(ProfileRegistry::load(path));
  return *holder;
}

std::string describe_rule(const ConversionRule& r) {
  std::string s = r.src_fmt + " -> " + r.dst_fmt + "  r=" + r.r_bits.cell();
  if (r.two_stage) s += "  two-stage";
  if (r.subnormal_rule == SubnormalRule::extend_to_cover_subnormal) s += "  subnormal-extend";
  if (r.flush_threshold) s += "  flush<" + r.flush_threshold->to_hex();
  if (r.entropy == EntropyInput::input_lsb) s += "  entropy=input-lsb";
  return s;
}

// ---- round -----------------------------------------------------------------

struct RoundCmd {
  Common common;
  RoundingOptions ropts;
  std::string fmt = "binary16";
  std::vector<std::string> values;
  std::string op;
  std::optional<std::uint64_t> draw;
  std::uint64_t samples = 1;
  bool two_stage = false;
  bool bits = false;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("round", "round values into a format");
    cmd->add_option("--fmt", fmt, "destination format");
    ropts.add(cmd, true);
    add_seed(cmd, common);
    add_output(cmd, common);
    add_digits(cmd, common);
    cmd->add_option("--draw", draw, "explicit random operand R instead of a seeded stream");
    cmd->add_option("--samples", samples, "roundings per input")->check(CLI::Range(1, 1000000));
    cmd->add_option("--op", op, "exact add/sub/mul of two operands, then round")
        ->check(CLI::IsMember({"add", "sub", "mul"}));
    cmd->add_flag("--two-stage", two_stage, "round to binary32 (RNE) first");
    cmd->add_flag("--bits", bits, "also print the encoding");
    cmd->add_option("values", values, "inputs (decimal, hex-float or num/den)")->required();
  }

  int run(std::ostream& out) {
    const FloatFormat& f = formats::by_name(fmt);
    const Rounding rounding = ropts.rounding("rne");
    std::unique_ptr<BitSource> source;
    const SrConfig* cfg = std::get_if<SrConfig>(&rounding);
    if (draw) {
      if (cfg == nullptr) throw ContractError("--draw needs a stochastic --variant");
      const unsigned width = cfg->fixed_width() ? cfg->r : 64;
      if (width < 64 && *draw >> width != 0) {
        throw ContractError("--draw does not fit in r = " + std::to_string(width) + " bits");
      }
      std::vector<std::uint8_t> all;
      for (std::uint64_t s = 0; s < samples * std::max<std::size_t>(1, values.size()); ++s) {
        ReplaySource one = ReplaySource::from_value(*draw, width);
        for (unsigned i = 0; i < width; ++i) all.push_back(one.next_bit() ? 1 : 0);
      }
      source = std::make_unique<ReplaySource>(std::move(all));
    } else {
      source = std::make_unique<Xoroshiro128Plus>(derive_stream(common.seed_value(), 0));
    }

    std::vector<std::pair<WorkingReal, WorkingReal>> inputs;  // (exact input, result)
    std::vector<RoundingFlags> flags;
    std::vector<WorkingReal> operands;
    for (const auto& v : values) operands.push_back(value_of(v));
    if (!op.empty()) {
      if (operands.size() != 2) throw ContractError("--op needs exactly two operands");
      const ArithOp aop = parse_arith_op(op);
      const WorkingReal exact = aop == ArithOp::add   ? operands[0] + operands[1]
                                : aop == ArithOp::sub ? operands[0] - operands[1]
                                                      : operands[0] * operands[1];
      for (std::uint64_t s = 0; s < samples; ++s) {
        RoundingFlags fl;
        const WorkingReal y =
            exact_op_then_round(aop, operands[0], operands[1], f, rounding, *source, &fl);
        inputs.emplace_back(exact, y);
        flags.push_back(fl);
      }
    } else {
      for (const auto& x : operands) {
        for (std::uint64_t s = 0; s < samples; ++s) {
          RoundingFlags fl;
          const WorkingReal y = two_stage ? two_stage_round(x, f, rounding, *source, &fl)
                                          : apply_rounding(f, x, rounding, *source, &fl);
          inputs.emplace_back(x, y);
          flags.push_back(fl);
        }
      }
    }

    if (common.format == "json") {
      json j;
      j["fmt"] = f.name;
      j["rounding"] = describe(rounding);
      j["results"] = json::array();
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        json e;
        e["input"] = inputs[i].first.to_hex();
        e["output"] = show(f, inputs[i].second, common.digits);
        if (f.layout()) e["bits"] = bits_hex(f, encode_bits(f, inputs[i].second));
        e["inexact"] = flags[i].inexact;
        e["overflow"] = flags[i].overflow;
        e["flushed"] = flags[i].flushed;
        j["results"].push_back(e);
      }
      out << j.dump(common.indent()) << '\n';
      return kExitOk;
    }
    for (const auto& [x, y] : inputs) {
      out << show(f, y, common.digits);
      if (bits) out << "  bits=" << bits_hex(f, encode_bits(f, y));
      out << '\n';
    }
    return kExitOk;
  }
};

// ---- convert ---------------------------------------------------------------

struct ConvertCmd {
  Common common;
  RoundingOptions ropts;
  std::string vendor;
  std::string src = "binary32";
  std::string dst;
  std::string profiles;
  std::optional<std::uint64_t> word;
  bool pair = false;
  std::string block;
  std::uint64_t samples = 1;
  std::vector<std::string> values;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("convert", "vendor conversion profiles and block formats");
    cmd->add_option("--vendor", vendor, "vendor profile name");
    cmd->add_option("--src", src, "source format");
    cmd->add_option("--dst", dst, "destination format");
    cmd->add_option("--profiles", profiles, "profile registry JSON (default: built in)");
    cmd->add_option("--word", word, "explicit random operand");
    cmd->add_flag("--pair", pair, "packed pair sharing one 32-bit random word");
    cmd->add_option("--block", block, "block quantization: mxfp4 or nvfp4")
        ->check(CLI::IsMember({"mxfp4", "nvfp4"}));
    cmd->add_option("--samples", samples, "conversions per input")->check(CLI::Range(1, 1000000));
    ropts.add(cmd, true);
    add_seed(cmd, common);
    add_output(cmd, common);
    add_digits(cmd, common);
    cmd->add_option("values", values, "inputs")->required();
  }

  int run_block(std::ostream& out) {
    const BlockFormatSpec spec = BlockFormatSpec::by_name(block);
    std::vector<WorkingReal> in;
    for (const auto& v : values) in.push_back(value_of(v));
    const Rounding rounding = ropts.rounding("rne");
    const QuantizedBlocks q = block_quantize(in, spec, rounding, common.seed_value());
    const FloatFormat& scale_fmt =
        spec.scale == ScaleFormat::e4m3 ? formats::fp8_e4m3() : formats::binary32();
    if (common.format == "json") {
      json j;
      j["block"] = spec.name;
      j["group_size"] = spec.group_size;
      j["rounding"] = describe(rounding);
      j["scales"] = json::array();
      j["scale_bits"] = json::array();
      for (std::size_t g = 0; g < q.scales.size(); ++g) {
        j["scales"].push_back(q.scales[g].to_hex());
        j["scale_bits"].push_back(bits_hex(formats::fp8_e4m3(), q.scale_bits[g]));
      }
      j["elements"] = json::array();
      j["element_bits"] = json::array();
      for (std::size_t i = 0; i < q.elements.size(); ++i) {
        j["elements"].push_back(show(spec.element, q.elements[i], common.digits));
        j["element_bits"].push_back(bits_hex(spec.element, q.element_bits[i]));
      }
      j["padded"] = q.padded;
      j["inexact_quotient"] = q.inexact_quotient;
      out << j.dump(common.indent()) << '\n';
      return kExitOk;
    }
    for (std::size_t g = 0; g < q.scales.size(); ++g) {
      out << "scale " << g << ' ' << show(scale_fmt, q.scales[g], common.digits) << '\n';
    }
    const std::vector<WorkingReal> deq = q.dequantize(spec.group_size);
    for (std::size_t i = 0; i < q.elements.size(); ++i) {
      out << show(spec.element, q.elements[i], common.digits) << "  bits="
          << bits_hex(spec.element, q.element_bits[i]) << "  value=" << deq[i].to_hex() << '\n';
    }
    return kExitOk;
  }

  int run(std::ostream& out) {
    if (!block.empty()) return run_block(out);
    if (vendor.empty() || dst.empty()) throw ContractError("convert needs --vendor and --dst");
    std::unique_ptr<ProfileRegistry> holder;
    const ProfileRegistry& reg = registry_for(profiles, holder);
    const FloatFormat& s = formats::by_name(src);
    const FloatFormat& d = formats::by_name(dst);
    const std::optional<ConversionRule> rule = reg.lookup(vendor, s, d);
    if (!rule) {
      throw LookupError("vendor '" + vendor + "' has no " + s.name + " -> " + d.name + " conversion");
    }
    std::vector<WorkingReal> results;
    if (pair) {
      if (values.size() != 2) throw ContractError("--pair needs exactly two inputs");
      std::uint32_t w = 0;
      if (word) {
        if (*word > 0xFFFFFFFFu) throw ContractError("--pair takes a 32-bit --word");
        w = static_cast<std::uint32_t>(*word);
      } else {
        Xoroshiro128Plus stream = derive_stream(common.seed_value(), 0);
        w = static_cast<std::uint32_t>(stream.next_bits(32));
      }
      const auto [a, b] = convert_packed_pair(*rule, value_of(values[0]), value_of(values[1]), w);
      results = {a, b};
    } else {
      Xoroshiro128Plus stream = derive_stream(common.seed_value(), 0);
      for (const auto& v : values) {
        const WorkingReal x = value_of(v);
        for (std::uint64_t k = 0; k < samples; ++k) {
          results.push_back(word ? convert(*rule, x, *word) : convert(*rule, x, stream));
        }
      }
    }
    if (common.format == "json") {
      json j;
      j["vendor"] = vendor;
      j["rule"] = describe_rule(*rule);
      j["r"] = rule->r_bits.cell();
      j["results"] = json::array();
      for (const auto& y : results) {
        json e;
        e["output"] = show(d, y, common.digits);
        if (d.layout()) e["bits"] = bits_hex(d, encode_bits(d, y));
        j["results"].push_back(e);
      }
      out << j.dump(common.indent()) << '\n';
      return kExitOk;
    }
    for (const auto& y : results) out << show(d, y, common.digits) << '\n';
    return kExitOk;
  }
};

// ---- dist ------------------------------------------------------------------

struct DistCmd {
  Common common;
  RoundingOptions ropts;
  std::string fmt = "binary16";
  std::string x;
  std::string sum;
  unsigned threads = 1;
  std::vector<std::string> positional;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("dist", "exact output distribution of one rounding");
    cmd->add_option("--fmt", fmt, "destination format");
    ropts.add(cmd, false);
    cmd->add_option("--x", x, "input value");
    cmd->add_option("--sum", sum, "comma-separated addends: expected recursive sum instead");
    cmd->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
    common.format = "json";
    add_output(cmd, common);
    cmd->add_option("value", positional, "input value (alternative to --x)");
  }

  int run(std::ostream& out) {
    const FloatFormat& f = formats::by_name(fmt);
    const SrConfig cfg = ropts.sr_config("limited");
    if (!sum.empty()) {
      std::vector<WorkingReal> addends;
      for (const auto& t : split_list(sum)) addends.push_back(value_of(t));
      const ExpectedSum es = expected_sum_enumeration(addends, f, cfg);
      json j;
      j["fmt"] = f.name;
      j["variant"] = cfg.describe();
      j["n"] = addends.size();
      j["mean"] = to_string(es.mean);
      j["exact_sum"] = to_string(es.exact_sum);
      j["bias"] = to_string(es.mean - es.exact_sum);
      j["variance"] = to_string(es.variance);
      j["paths"] = es.paths.str();
      j["outcomes"] = es.outcomes;
      if (common.format == "text") {
        for (const auto& [k, v] : j.items()) {
          out << k << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
        }
      } else {
        out << j.dump(common.indent()) << '\n';
      }
      return kExitOk;
    }
    std::string text = x;
    if (text.empty() && positional.size() == 1) text = positional[0];
    if (text.empty() || positional.size() > 1 || (!x.empty() && !positional.empty())) {
      throw ContractError("dist needs exactly one input value");
    }
    const WorkingReal v = value_of(text);
    const DistributionReport rep = distribution(f, v, cfg, threads);
    json j = json::parse(rep.to_json());
    j["ulp"] = ulp(f, v).to_hex();
    j["fmt"] = f.name;
    if (common.format == "text") {
      for (const auto& [k, val] : j.items()) {
        out << k << " = " << (val.is_string() ? val.get<std::string>() : val.dump()) << '\n';
      }
    } else {
      out << j.dump(common.indent()) << '\n';
    }
    return kExitOk;
  }
};

// ---- profiles --------------------------------------------------------------

struct ProfilesCmd {
  Common common;
  std::string profiles;
  std::string vendor;
  CLI::App* list = nullptr;
  CLI::App* show_cmd = nullptr;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("profiles", "inspect the vendor profile registry");
    cmd->require_subcommand(1);
    list = cmd->add_subcommand("list", "all vendors and their conversions");
    show_cmd = cmd->add_subcommand("show", "one vendor in detail");
    for (CLI::App* sub : {list, show_cmd}) {
      sub->add_option("--profiles", profiles, "profile registry JSON (default: built in)");
      add_output(sub, common);
    }
    show_cmd->add_option("vendor", vendor, "vendor name")->required();
  }

  int run(std::ostream& out) {
    std::unique_ptr<ProfileRegistry> holder;
    const ProfileRegistry& reg = registry_for(profiles, holder);
    if (list->parsed()) {
      if (common.format == "json") {
        out << reg.to_json_text(common.pretty ? 2 : -1) << '\n';
        return kExitOk;
      }
      for (const auto& v : reg.vendors()) {
        out << v.name << '\n';
        for (const auto& r : v.rules) out << "  " << describe_rule(r) << '\n';
      }
      return kExitOk;
    }
    const VendorProfile& v = reg.vendor(vendor);
    if (common.format == "json") {
      out << ProfileRegistry({v}).to_json_text(common.pretty ? 2 : -1) << '\n';
      return kExitOk;
    }
    out << v.name << '\n';
    for (const auto& r : v.rules) {
      out << "  " << describe_rule(r) << '\n';
      out << "    random operand width: "
          << (r.random_word_width == 0 ? std::string("stream")
                                       : std::to_string(r.random_word_width) + " bits")
          << '\n';
      if (!r.note.empty()) out << "    " << r.note << '\n';
    }
    for (const auto& n : v.notes) out << "  note: " << n << '\n';
    return kExitOk;
  }
};

// ---- experiment ------------------------------------------------------------

struct ExperimentCmd {
  Common common;
  std::string kind;
  std::string fmt = "binary16";
  std::optional<std::uint64_t> n;
  std::string n_grid;
  std::string r_grid;
  std::optional<std::uint64_t> trials;
  std::string modes;
  unsigned threads = 1;
  std::string out_path;
  int digits = 17;
  std::string acc0, delta, step, eval_point, constant, intermediate;
  std::optional<std::uint64_t> iterations;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("experiment", "run a numerical experiment");
    cmd->add_option("kind", kind,
                    "stagnation|sum_growth|dot|horner|pairwise|r_sweep|gd|pi_demo")
        ->required();
    cmd->add_option("--fmt", fmt, "working format");
    cmd->add_option("--n", n, "problem size")->check(CLI::PositiveNumber);
    cmd->add_option("--n-grid", n_grid, "comma-separated sizes");
    cmd->add_option("--r-grid", r_grid, "comma-separated random bit counts (r_sweep)");
    cmd->add_option("--trials", trials, "trials")->check(CLI::PositiveNumber);
    cmd->add_option("--modes", modes, "comma-separated modes, e.g. rne,sr,limited:6,a:3");
    cmd->add_option("--threads", threads, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1, 256));
    cmd->add_option("--out", out_path, "write the CSV rows here");
    cmd->add_option("--digits", digits, "significant digits of CSV errors")->check(CLI::Range(1, 40));
    cmd->add_option("--acc0", acc0, "stagnation: starting value");
    cmd->add_option("--delta", delta, "stagnation: addend");
    cmd->add_option("--step", step, "gd: step size");
    cmd->add_option("--iterations", iterations, "gd: iterations");
    cmd->add_option("--eval-point", eval_point, "horner: evaluation point");
    cmd->add_option("--constant", constant, "use this addend instead of uniform draws");
    cmd->add_option("--intermediate", intermediate, "r_sweep: limited-SR intermediate")
        ->check(CLI::IsMember(kIntermediates));
    add_seed(cmd, common);
    // Summary JSON unless asked otherwise; the pi demo reads better as text.
    common.format.clear();
    add_output(cmd, common, kOutputs);
  }

  int run(std::ostream& out) {
    const ExperimentKind k = parse_experiment_kind(kind);
    if (common.format.empty()) common.format = k == ExperimentKind::pi_demo ? "text" : "json";
    if (k == ExperimentKind::pi_demo) {
      const PiDemoReport rep = run_pi_demo();
      if (common.format == "json") {
        out << rep.to_json(common.pretty ? 2 : -1) << '\n';
      } else {
        out << rep.text();
      }
      return kExitOk;
    }
    ExperimentSpec spec = default_spec(k);
    spec.fmt = formats::by_name(fmt);
    if (n) spec.n = *n;
    if (!n_grid.empty()) {
      spec.n_grid.clear();
      for (const auto& t : split_list(n_grid)) spec.n_grid.push_back(parse_seed(t));
    }
    if (!r_grid.empty()) {
      spec.r_grid.clear();
      for (const auto& t : split_list(r_grid)) {
        const std::uint64_t r = parse_seed(t);
        if (r > kMaxRandomBits) throw ContractError("r-grid entries must be at most 64");
        spec.r_grid.push_back(static_cast<unsigned>(r));
      }
    }
    if (trials) spec.trials = *trials;
    if (!modes.empty()) {
      for (const auto& t : split_list(modes)) spec.modes.push_back(parse_mode(t));
    }
    spec.seed = common.seed_value();
    spec.threads = threads;
    if (!acc0.empty()) spec.acc0 = value_of(acc0);
    if (!delta.empty()) spec.delta = value_of(delta);
    if (!step.empty()) spec.step = value_of(step);
    if (!eval_point.empty()) spec.eval_point = value_of(eval_point);
    if (!constant.empty()) spec.constant_addend = value_of(constant);
    if (!intermediate.empty()) spec.intermediate = parse_intermediate(intermediate);
    if (iterations) spec.iterations = *iterations;

    const ExperimentResult res = run_experiment(spec);
    if (!out_path.empty()) {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw Error("cannot write '" + out_path + "'");
      f << res.to_csv(digits);
      if (!f) throw Error("cannot write '" + out_path + "'");
    }
    if (common.format == "csv") {
      out << res.to_csv(digits);
    } else if (common.format == "text") {
      for (const auto& c : res.summary) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-14s n=%-8llu r=%-3u median_rel_err=%.6g mean_rel_err=%.6g",
                      c.mode.c_str(), static_cast<unsigned long long>(c.n), c.r,
                      c.median_rel_err, c.mean_rel_err);
        out << buf << '\n';
      }
      for (const auto& [m, s] : res.slopes) out << "slope " << m << " = " << s << '\n';
      if (res.heuristic_r) out << "heuristic r = " << *res.heuristic_r << '\n';
      if (res.knee_r) out << "knee r = " << *res.knee_r << '\n';
    } else {
      out << res.summary_json(common.pretty ? 2 : -1) << '\n';
    }
    return kExitOk;
  }
};

}  // namespace

const std::vector<CommandInfo>& commands() {
  static const std::vector<CommandInfo> kCommands = {
      {"round", "round values into a format",
       {"parse_working_real", "round_deterministic", "sr_exact", "sr_limited", "p3109_round",
        "apply_rounding", "exact_op_then_round", "two_stage_round", "encode_bits"}},
      {"convert", "vendor conversion profiles and block formats",
       {"ProfileRegistry::lookup", "ProfileRegistry::load", "convert", "convert_packed_pair",
        "block_quantize"}},
      {"dist", "exact output distribution of one rounding",
       {"distribution", "expected_sum_enumeration", "neighbors", "q_fraction", "ulp"}},
      {"profiles", "inspect the vendor profile registry",
       {"ProfileRegistry::builtin", "ProfileRegistry::vendor", "ProfileRegistry::to_json_text"}},
      {"experiment", "run a numerical experiment",
       {"run_stagnation", "run_sum_growth", "run_r_sweep", "run_kernel_experiment", "run_gd",
        "run_pi_demo", "derive_stream"}},
  };
  return kCommands;
}

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"srkit: stochastic rounding emulation toolkit", "srkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  bool verbose = false;
  app.add_flag("--verbose", verbose, "report timing on stderr");

  RoundCmd round_cmd;
  ConvertCmd convert_cmd;
  DistCmd dist_cmd;
  ProfilesCmd profiles_cmd;
  ExperimentCmd experiment_cmd;
  round_cmd.add(app);
  convert_cmd.add(app);
  dist_cmd.add(app);
  profiles_cmd.add(app);
  experiment_cmd.add(app);

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("srkit");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  int status = kExitOk;
  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "round") {
      status = round_cmd.run(out);
    } else if (name == "convert") {
      status = convert_cmd.run(out);
    } else if (name == "dist") {
      status = dist_cmd.run(out);
    } else if (name == "profiles") {
      status = profiles_cmd.run(out);
    } else {
      status = experiment_cmd.run(out);
    }
  } catch (const ParseError& e) {
    err << "srkit: " << e.what() << '\n';
    status = kExitUsage;
  } catch (const Error& e) {
    err << "srkit: " << e.what() << '\n';
    status = kExitError;
  }
  if (verbose) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    err << "srkit: finished in " << secs << " s\n";
  }
  return status;
}

}  // namespace srkit::cli
