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

#include "pbsmt/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "pbsmt/error.hpp"
#include "pbsmt/rng.hpp"
#include "pbsmt/utf8.hpp"

namespace pbsmt {
namespace {

bool in_ranges(const std::vector<CodePointRange>& ranges, char32_t cp) {
  return std::any_of(ranges.begin(), ranges.end(),
                     [cp](const CodePointRange& r) { return cp >= r.first && cp <= r.second; });
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

char32_t parse_code_point(std::string_view text, std::size_t line) {
  text = trim(text);
  if (text.size() < 3 || (text.substr(0, 2) != "U+" && text.substr(0, 2) != "u+")) {
    throw ParseError("expected code point like U+0021, got '" + std::string(text) + "'", line);
  }
  const std::string hex(text.substr(2));
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(hex, &used, 16);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != hex.size() || v > 0x10FFFF) {
    throw ParseError("invalid code point '" + std::string(text) + "'", line);
  }
  return static_cast<char32_t>(v);
}

std::vector<CodePointRange> parse_ranges(std::string_view value, std::size_t line) {
  std::vector<CodePointRange> out;
  for (const auto& item : split_on(value, ",")) {
    const std::string_view field = trim(item);
    if (field.empty()) continue;
    const auto dash = field.find('-');
    if (dash == std::string_view::npos) {
      const char32_t cp = parse_code_point(field, line);
      out.emplace_back(cp, cp);
    } else {
      const char32_t lo = parse_code_point(field.substr(0, dash), line);
      const char32_t hi = parse_code_point(field.substr(dash + 1), line);
      if (hi < lo) throw ParseError("empty code point range", line);
      out.emplace_back(lo, hi);
    }
  }
  return out;
}

bool parse_bool(std::string_view value, std::size_t line) {
  value = trim(value);
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParseError("expected boolean, got '" + std::string(value) + "'", line);
}

std::string pair_key(const SentencePair& p) {
  return join(p.source) + '\n' + join(p.target);
}

}  // namespace

std::vector<Tokens> Corpus::sources() const {
  std::vector<Tokens> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.source);
  return out;
}

std::vector<Tokens> Corpus::targets() const {
  std::vector<Tokens> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.target);
  return out;
}

bool CleaningRules::is_punctuation(char32_t cp) const { return in_ranges(punctuation, cp); }

bool CleaningRules::is_emoji(char32_t cp) const { return in_ranges(emoji, cp); }

CleaningRules CleaningRules::defaults() {
  CleaningRules r;
  r.punctuation = {
      {0x21, 0x2F},     {0x3A, 0x40},     {0x5B, 0x60},     {0x7B, 0x7E},
      {0xA1, 0xA9},     {0xAB, 0xB1},     {0xB4, 0xB4},     {0xB6, 0xB8},
      {0xBB, 0xBB},     {0xBF, 0xBF},     {0xD7, 0xD7},     {0xF7, 0xF7},
      {0x2010, 0x2027}, {0x2030, 0x205E}, {0x060C, 0x060C}, {0x061B, 0x061B},
      {0x061F, 0x061F}, {0x066A, 0x066D}, {0x06D4, 0x06D4}, {0x0964, 0x0965},
      {0x0970, 0x0970}, {0x3001, 0x3003}, {0x3008, 0x3011}, {0xFF01, 0xFF0F},
      {0xFF1A, 0xFF20},
  };
  r.emoji = {
      {0x1F000, 0x1FAFF}, {0x2300, 0x23FF}, {0x2600, 0x27BF},  {0x2B00, 0x2BFF},
      {0x200D, 0x200D},   {0x20E3, 0x20E3}, {0xFE00, 0xFE0F}, {0xE0020, 0xE007F},
  };
  return r;
}

CleaningRules CleaningRules::parse(std::istream& in) {
  CleaningRules r;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line);
    const std::string_view key = trim(text.substr(0, eq));
    const std::string_view value = text.substr(eq + 1);
    if (key == "punctuation") {
      auto ranges = parse_ranges(value, line);
      r.punctuation.insert(r.punctuation.end(), ranges.begin(), ranges.end());
    } else if (key == "emoji") {
      auto ranges = parse_ranges(value, line);
      r.emoji.insert(r.emoji.end(), ranges.begin(), ranges.end());
    } else if (key == "strip_punctuation") {
      r.strip_punctuation = parse_bool(value, line);
    } else if (key == "strip_emoji") {
      r.strip_emoji = parse_bool(value, line);
    } else {
      throw ParseError("unknown cleaning key '" + std::string(key) + "'", line);
    }
  }
  return r;
}

CleaningRules CleaningRules::load(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse(in);
}

Tokens clean_text(std::string_view text, const CleaningRules& rules, std::size_t line) {
  std::vector<char32_t> cps;
  try {
    cps = utf8::decode(text);
  } catch (const EncodingError& e) {
    throw EncodingError(e.what(), line);
  }
  Tokens tokens;
  std::string current;
  for (char32_t cp : cps) {
    if (is_unicode_space(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (rules.strip_punctuation && rules.is_punctuation(cp)) continue;
    if (rules.strip_emoji && rules.is_emoji(cp)) continue;
    utf8::append(current, cp);
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::optional<SentencePair> clean_pair(std::string_view source, std::string_view target,
                                       const CleaningRules& rules, std::size_t line) {
  SentencePair pair;
  pair.source = clean_text(source, rules, line);
  pair.target = clean_text(target, rules, line);
  if (pair.source.empty() || pair.target.empty()) return std::nullopt;
  return pair;
}

Corpus dedup(const Corpus& corpus) {
  Corpus out;
  out.source_lang = corpus.source_lang;
  out.target_lang = corpus.target_lang;
  std::unordered_set<std::string> seen;
  for (const auto& p : corpus.pairs) {
    if (seen.insert(pair_key(p)).second) out.pairs.push_back(p);
  }
  return out;
}

Corpus similarity_filter(const Corpus& corpus, std::span<const double> scores, double threshold) {
  if (scores.size() != corpus.size()) {
    throw SizeError("similarity scores: expected " + std::to_string(corpus.size()) +
                    " values, got " + std::to_string(scores.size()));
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      throw ValidationError("similarity score " + format_double(scores[i]) + " for pair " +
                            std::to_string(i + 1) + " is outside [0,1]");
    }
  }
  Corpus out;
  out.source_lang = corpus.source_lang;
  out.target_lang = corpus.target_lang;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= threshold) {
      out.pairs.push_back(corpus.pairs[i]);
      out.pairs.back().similarity = scores[i];
    }
  }
  return out;
}

LengthDiffHistogram::Category LengthDiffHistogram::category_of(std::size_t diff) {
  if (diff == 0) return kIdentical;
  if (diff <= 3) return kOneToThree;
  if (diff <= 5) return kFourToFive;
  return kSixOrMore;
}

std::string_view LengthDiffHistogram::label(Category c) {
  switch (c) {
    case kIdentical: return "0";
    case kOneToThree: return "1-3";
    case kFourToFive: return "4-5";
    default: return ">=6";
  }
}

double LengthDiffHistogram::percent(Category c) const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(counts[c]) / static_cast<double>(total);
}

double LengthDiffHistogram::below_three_percent() const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(below_three) / static_cast<double>(total);
}

void LengthDiffHistogram::add(std::size_t source_len, std::size_t target_len) {
  const std::size_t diff = source_len > target_len ? source_len - target_len : target_len - source_len;
  ++counts[category_of(diff)];
  ++total;
  if (diff < 3) ++below_three;
}

void LengthDiffHistogram::write_csv(std::ostream& out) const {
  out << "category,count,percent\n";
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    const auto cat = static_cast<Category>(c);
    out << label(cat) << ',' << counts[c] << ',' << format_fixed(percent(cat), 2) << '\n';
  }
  out << "<3," << below_three << ',' << format_fixed(below_three_percent(), 2) << '\n';
}

LengthDiffHistogram length_diff_histogram(const Corpus& corpus) {
  LengthDiffHistogram h;
  for (const auto& p : corpus.pairs) h.add(p.source.size(), p.target.size());
  return h;
}

SentencePair invert_source(const SentencePair& pair) {
  SentencePair out = pair;
  std::reverse(out.source.begin(), out.source.end());
  return out;
}

void TransliterationTable::add(std::string grapheme, std::string replacement) {
  if (grapheme.empty()) throw ValidationError("transliteration grapheme must not be empty");
  const std::size_t len = utf8::length(grapheme);
  if (!utf8::is_valid(replacement)) throw EncodingError("invalid UTF-8 in replacement", 0);
  for (char c : replacement) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      throw ValidationError("transliteration replacement for '" + grapheme +
                            "' contains whitespace");
    }
  }
  max_key_code_points_ = std::max(max_key_code_points_, len);
  map_[std::move(grapheme)] = std::move(replacement);
}

std::string TransliterationTable::apply(std::string_view text) const {
  const auto cps = utf8::decode(text);
  // Byte offset of every code point boundary.
  std::vector<std::size_t> offsets;
  offsets.reserve(cps.size() + 1);
  std::size_t pos = 0;
  for (char32_t cp : cps) {
    offsets.push_back(pos);
    std::string tmp;
    utf8::append(tmp, cp);
    pos += tmp.size();
  }
  offsets.push_back(pos);

  std::string out;
  std::size_t i = 0;
  while (i < cps.size()) {
    bool matched = false;
    const std::size_t longest = std::min(max_key_code_points_, cps.size() - i);
    for (std::size_t len = longest; len >= 1; --len) {
      const std::string key(text.substr(offsets[i], offsets[i + len] - offsets[i]));
      if (auto it = map_.find(key); it != map_.end()) {
        out += it->second;
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.append(text.substr(offsets[i], offsets[i + 1] - offsets[i]));
      ++i;
    }
  }
  return out;
}

TransliterationTable TransliterationTable::parse(std::istream& in) {
  TransliterationTable table;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (trim(raw).empty()) continue;
    if (!utf8::is_valid(raw)) throw EncodingError("invalid UTF-8", line);
    const auto tab = raw.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError("expected grapheme<TAB>replacement", line);
    }
    try {
      table.add(raw.substr(0, tab), raw.substr(tab + 1));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line);
    }
  }
  return table;
}

TransliterationTable TransliterationTable::load(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse(in);
}

SentencePair romanize(const SentencePair& pair, const TransliterationTable& table) {
  const auto convert = [&](const Tokens& tokens) {
    Tokens out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
      std::string r = table.apply(t);
      if (!r.empty()) out.push_back(std::move(r));
    }
    return out;
  };
  SentencePair out;
  out.source = convert(pair.source);
  out.target = convert(pair.target);
  out.similarity = pair.similarity;
  return out;
}

CorpusSplit split_corpus(const Corpus& corpus, const SplitSizes& sizes, std::uint64_t seed) {
  const std::size_t requested = sizes.train + sizes.tune + sizes.test;
  if (requested > corpus.size()) {
    throw SizeError("split sizes sum to " + std::to_string(requested) + " but corpus has " +
                    std::to_string(corpus.size()) + " pairs");
  }
  Rng rng(seed);
  const auto perm = rng.permutation(corpus.size());
  const auto take = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> idx(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                                 perm.begin() + static_cast<std::ptrdiff_t>(begin + count));
    std::sort(idx.begin(), idx.end());
    Corpus c;
    c.source_lang = corpus.source_lang;
    c.target_lang = corpus.target_lang;
    for (std::size_t i : idx) c.pairs.push_back(corpus.pairs[i]);
    return c;
  };
  CorpusSplit split;
  split.test = take(0, sizes.test);
  split.tune = take(sizes.test, sizes.tune);
  split.train = take(sizes.test + sizes.tune, sizes.train);
  return split;
}

Corpus read_parallel(const std::filesystem::path& source, const std::filesystem::path& target) {
  const auto src = read_lines(source);
  const auto tgt = read_lines(target);
  if (src.size() != tgt.size()) {
    throw SizeError("parallel files differ in length: " + std::to_string(src.size()) + " vs " +
                    std::to_string(tgt.size()) + " lines");
  }
  Corpus corpus;
  corpus.pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!utf8::is_valid(src[i])) throw EncodingError("invalid UTF-8 in " + source.string(), i + 1);
    if (!utf8::is_valid(tgt[i])) throw EncodingError("invalid UTF-8 in " + target.string(), i + 1);
    corpus.pairs.push_back({split_whitespace(src[i]), split_whitespace(tgt[i]), std::nullopt});
  }
  return corpus;
}

void write_parallel(const Corpus& corpus, const std::filesystem::path& source,
                    const std::filesystem::path& target) {
  write_tokenized(source, corpus.sources());
  write_tokenized(target, corpus.targets());
}

std::vector<double> read_scores(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<double> scores;
  scores.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) scores.push_back(parse_double(lines[i], i + 1));
  return scores;
}

}  // namespace pbsmt
