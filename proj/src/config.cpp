// Copyright 2026 The pbsmt Authors
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

#include "pbsmt/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>

#include "pbsmt/error.hpp"

namespace pbsmt {
namespace {

std::vector<OptionSpec> build_specs() {
  std::vector<OptionSpec> s = {
      {"general", "config", "Config file (command-line flags override it)"},
      {"general", "src", "Source-side text, one sentence per line"},
      {"general", "tgt", "Target-side text, one sentence per line"},
      {"general", "scores", "Similarity scores, one per pair"},
      {"general", "translit", "Transliteration table (grapheme TAB replacement)"},
      {"general", "lm-text", "Extra monolingual target text for the LM"},
      {"general", "cleaning-rules", "Character classes removed by preprocess"},
      {"general", "input", "Input text file"},
      {"general", "output", "Output file"},
      {"general", "out-src", "Output source-side file"},
      {"general", "out-tgt", "Output target-side file"},
      {"general", "out-scores", "Output similarity scores"},
      {"general", "hyp", "Hypothesis translations"},
      {"general", "ref", "Reference translations"},
      {"general", "alignment", "Word alignment file (i-j pairs)"},
      {"general", "ttable", "Lexical table t(target|source)"},
      {"general", "rttable", "Lexical table t(source|target)"},
      {"general", "phrase-table", "Phrase table"},
      {"general", "lm", "ARPA language model"},
      {"general", "weights-file", "Feature weights file (name = value)"},
      {"general", "nbest", "N-best output file"},
      {"general", "nbest-size", "Translations per sentence in the n-best file (default 100)"},
      {"general", "bpe-model", "BPE merge file"},
      {"general", "report", "Report output file"},
      {"general", "seed", "Seed for every random choice (default 1)"},
      {"general", "threads", "Worker threads (default: PBSMT_THREADS or 1)"},
      {"general", "variant", "baseline, romanized, inverted or all"},
      {"general", "folds", "Cross-validation folds (default 4)"},
      {"filter", "threshold", "Minimum similarity score kept (default 0.9)"},
      {"bpe", "merges", "Number of BPE merges (default 32000)"},
      {"align", "iterations", "IBM Model 1 EM iterations (default 10)"},
      {"align", "ibm2-iterations", "IBM Model 2 EM iterations after Model 1 (default 0)"},
      {"align", "null", "Allow alignment to NULL (default true)"},
      {"align", "heuristic", "intersection, union or grow-diag-final (default)"},
      {"phrase", "max-length", "Maximum phrase length (default 7)"},
      {"lm", "order", "N-gram order (default 5)"},
      {"lm", "discount", "Absolute discount for fixed policy (default 0.75)"},
      {"lm", "discount-policy", "fixed (default) or count-of-counts"},
      {"decoder", "stack-size", "Hypotheses kept per stack (default 100)"},
      {"decoder", "beam-threshold", "Relative probability threshold, 0 disables (default 1e-5)"},
      {"decoder", "distortion-limit", "Maximum jump, negative for unlimited (default 6)"},
      {"decoder", "max-options", "Translation options per span, 0 for all (default 20)"},
      {"decoder", "oov-penalty", "Cost of copying an unknown word, log10 units (default 10)"},
      {"tune", "enabled", "Tune weights inside crossval/experiment (default false)"},
      {"tune", "iterations", "Decode/optimize rounds (default 5)"},
      {"tune", "nbest", "N-best size while tuning (default 100)"},
      {"tune", "restarts", "Random restarts per round (default 5)"},
  };
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    s.push_back({"weights", std::string(feature_name(f)), "Weight of the " +
                                                              std::string(feature_name(f)) +
                                                              " feature"});
  }
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

std::string OptionSpec::flag() const {
  return section == "general" ? key : section + "-" + key;
}

std::string OptionSpec::qualified_key() const { return section + "." + key; }

const std::vector<OptionSpec>& option_specs() {
  static const std::vector<OptionSpec> specs = build_specs();
  return specs;
}

const OptionSpec* find_option(std::string_view qualified) {
  for (const auto& s : option_specs()) {
    if (s.qualified_key() == qualified) return &s;
  }
  return nullptr;
}

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> values;
  std::string section = "general";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ParseError("unterminated section header", lineno);
      section = std::string(trim(t.substr(1, t.size() - 2)));
      if (section.empty()) throw ParseError("empty section name", lineno);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected `key = value`", lineno);
    const std::string key(trim(t.substr(0, eq)));
    const std::string value(trim(t.substr(eq + 1)));
    const std::string qualified = section + "." + key;
    if (key.empty()) throw ParseError("empty key", lineno);
    if (qualified == "general.config" || find_option(qualified) == nullptr) {
      throw ParseError("unknown key '" + key + "' in [" + section + "]", lineno);
    }
    if (!values.emplace(qualified, value).second) {
      throw ParseError("duplicate key '" + key + "' in [" + section + "]", lineno);
    }
  }
  return values;
}

std::map<std::string, std::string> load_config(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_config(in);
}

PipelineConfig::PipelineConfig(std::map<std::string, std::string> values)
    : values_(std::move(values)) {}

void PipelineConfig::set(const std::string& qualified, std::string value) {
  values_[qualified] = std::move(value);
}

bool PipelineConfig::has(std::string_view qualified) const {
  return values_.count(std::string(qualified)) > 0;
}

std::optional<std::string> PipelineConfig::get(std::string_view qualified) const {
  const auto it = values_.find(std::string(qualified));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string PipelineConfig::require(std::string_view qualified) const {
  if (auto v = get(qualified)) return *v;
  const auto* spec = find_option(qualified);
  const std::string flag = spec ? spec->flag() : std::string(qualified);
  throw ValidationError("missing required setting --" + flag);
}

std::filesystem::path PipelineConfig::input_path(std::string_view qualified) const {
  const std::filesystem::path p = require(qualified);
  if (!std::filesystem::exists(p)) throw IoError("no such file: " + p.string());
  return p;
}

std::optional<std::filesystem::path> PipelineConfig::optional_input_path(
    std::string_view qualified) const {
  if (!has(qualified)) return std::nullopt;
  return input_path(qualified);
}

std::filesystem::path PipelineConfig::output_path(std::string_view qualified) const {
  return require(qualified);
}

double PipelineConfig::number(std::string_view qualified, double fallback, double lo,
                              double hi) const {
  const auto v = get(qualified);
  if (!v) return fallback;
  double x;
  try {
    x = parse_double(*v);
  } catch (const ParseError&) {
    throw ValidationError(std::string(qualified) + ": '" + *v + "' is not a number");
  }
  if (!(x >= lo && x <= hi)) {
    throw ValidationError(std::string(qualified) + " must be in [" + format_double(lo) + ", " +
                          format_double(hi) + "], got " + *v);
  }
  return x;
}

long long PipelineConfig::integer(std::string_view qualified, long long fallback, long long lo,
                                  long long hi) const {
  const auto v = get(qualified);
  if (!v) return fallback;
  long long x;
  try {
    x = parse_int(*v);
  } catch (const ParseError&) {
    throw ValidationError(std::string(qualified) + ": '" + *v + "' is not an integer");
  }
  if (x < lo || x > hi) {
    throw ValidationError(std::string(qualified) + " must be in [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "], got " + *v);
  }
  return x;
}

bool PipelineConfig::boolean(std::string_view qualified, bool fallback) const {
  const auto v = get(qualified);
  if (!v) return fallback;
  const auto s = lower(*v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ValidationError(std::string(qualified) + ": '" + *v + "' is not a boolean");
}

double PipelineConfig::filter_threshold() const {
  return number("filter.threshold", 0.9, -1.0, 1.0);
}

std::size_t PipelineConfig::bpe_merges() const {
  return static_cast<std::size_t>(integer("bpe.merges", 32000, 0, 100000000));
}

std::uint64_t PipelineConfig::seed() const {
  return static_cast<std::uint64_t>(
      integer("general.seed", 1, 0, std::numeric_limits<long long>::max()));
}

std::size_t PipelineConfig::threads() const {
  if (has("general.threads")) return static_cast<std::size_t>(integer("general.threads", 1, 1, 1024));
  if (const char* env = std::getenv("PBSMT_THREADS"); env != nullptr && *env != '\0') {
    long long x;
    try {
      x = parse_int(env);
    } catch (const ParseError&) {
      throw ValidationError(std::string("PBSMT_THREADS: '") + env + "' is not an integer");
    }
    if (x < 1 || x > 1024) throw ValidationError("PBSMT_THREADS must be in [1, 1024]");
    return static_cast<std::size_t>(x);
  }
  return 1;
}

std::size_t PipelineConfig::folds() const {
  return static_cast<std::size_t>(integer("general.folds", 4, 2, 1000));
}

std::size_t PipelineConfig::nbest_size() const {
  return static_cast<std::size_t>(integer("general.nbest-size", 100, 1, 100000));
}

SystemConfig PipelineConfig::system() const {
  SystemConfig c;
  c.ibm1_iterations = static_cast<std::size_t>(integer("align.iterations", 10, 0, 1000));
  c.ibm2_iterations = static_cast<std::size_t>(integer("align.ibm2-iterations", 0, 0, 1000));
  c.use_null = boolean("align.null", true);
  if (const auto h = get("align.heuristic")) {
    try {
      c.heuristic = parse_symmetrization(*h);
    } catch (const Error& e) {
      throw ValidationError(std::string("align.heuristic: ") + e.what());
    }
  }
  c.max_phrase_length = static_cast<std::size_t>(integer("phrase.max-length", 7, 1, 255));
  c.lm_order = static_cast<std::size_t>(integer("lm.order", 5, 1, kMaxLmOrder));
  c.discount.fixed = number("lm.discount", 0.75, std::numeric_limits<double>::min(), 1.0);
  if (const auto p = get("lm.discount-policy")) {
    if (*p == "fixed") {
      c.discount.policy = DiscountOptions::Policy::kFixed;
    } else if (*p == "count-of-counts") {
      c.discount.policy = DiscountOptions::Policy::kCountOfCounts;
    } else {
      throw ValidationError("lm.discount-policy must be fixed or count-of-counts, got " + *p);
    }
  }
  auto& d = c.decoder;
  d.stack_size = static_cast<std::size_t>(integer("decoder.stack-size", 100, 1, 1000000));
  d.beam_threshold = number("decoder.beam-threshold", 1e-5, 0.0, 1.0);
  d.distortion_limit =
      static_cast<int>(integer("decoder.distortion-limit", 6, -1000000, 1000000));
  d.max_options = static_cast<std::size_t>(integer("decoder.max-options", 20, 0, 1000000));
  d.oov_penalty = number("decoder.oov-penalty", 10.0, 0.0, 1e6);
  d.max_phrase_length = c.max_phrase_length;

  if (const auto w = get("general.weights-file")) {
    if (!std::filesystem::exists(*w)) throw IoError("no such file: " + *w);
    c.weights = FeatureWeights::load(*w);
  }
  const double big = std::numeric_limits<double>::max();
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    c.weights[f] = number("weights." + std::string(feature_name(f)), c.weights[f], -big, big);
  }

  c.tune = boolean("tune.enabled", false);
  c.tuning.iterations = static_cast<std::size_t>(integer("tune.iterations", 5, 1, 1000));
  c.tuning.nbest = static_cast<std::size_t>(integer("tune.nbest", 100, 1, 100000));
  c.tuning.restarts = static_cast<std::size_t>(integer("tune.restarts", 5, 0, 1000));
  c.tuning.seed = seed();
  c.threads = threads();
  c.tuning.threads = c.threads;
  return c;
}

}  // namespace pbsmt
