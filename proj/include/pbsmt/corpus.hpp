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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pbsmt/text.hpp"

namespace pbsmt {

struct SentencePair {
  Tokens source;
  Tokens target;
  std::optional<double> similarity;

  bool operator==(const SentencePair&) const = default;
};

struct Corpus {
  std::vector<SentencePair> pairs;
  std::string source_lang = "src";
  std::string target_lang = "tgt";

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }

  std::vector<Tokens> sources() const;
  std::vector<Tokens> targets() const;
};

// Inclusive code point ranges.
using CodePointRange = std::pair<char32_t, char32_t>;

// Character classes removed by clean_pair. The defaults mirror
// config/cleaning.conf.
struct CleaningRules {
  std::vector<CodePointRange> punctuation;
  std::vector<CodePointRange> emoji;
  bool strip_punctuation = true;
  bool strip_emoji = true;

  bool is_punctuation(char32_t cp) const;
  bool is_emoji(char32_t cp) const;

  static CleaningRules defaults();

  // Format: `punctuation = U+0021-U+002F, U+00AB`, `emoji = ...`,
  // `strip_punctuation = true|false`, `strip_emoji = true|false`.
  // Repeated class keys accumulate. '#' starts a comment line.
  static CleaningRules parse(std::istream& in);
  static CleaningRules load(const std::filesystem::path& path);
};

// Strips configured characters and normalizes whitespace. Throws EncodingError
// carrying `line` if either side is not UTF-8.
Tokens clean_text(std::string_view text, const CleaningRules& rules, std::size_t line = 0);

// Returns nothing when either side is empty after cleaning.
std::optional<SentencePair> clean_pair(std::string_view source, std::string_view target,
                                       const CleaningRules& rules, std::size_t line = 0);

// Keeps the first occurrence of each exact (source, target) pair.
Corpus dedup(const Corpus& corpus);

// Keeps pairs whose score is >= threshold and records the score on them.
Corpus similarity_filter(const Corpus& corpus, std::span<const double> scores, double threshold);

struct LengthDiffHistogram {
  enum Category : std::size_t { kIdentical = 0, kOneToThree, kFourToFive, kSixOrMore, kNumCategories };

  std::array<std::uint64_t, kNumCategories> counts{};
  std::uint64_t total = 0;
  // Pairs with |difference| < 3.
  std::uint64_t below_three = 0;

  static Category category_of(std::size_t diff);
  static std::string_view label(Category c);
  double percent(Category c) const;
  double below_three_percent() const;

  void add(std::size_t source_len, std::size_t target_len);

  // CSV `category,count,percent` with one row per category followed by a
  // `<3` summary row.
  void write_csv(std::ostream& out) const;
};

LengthDiffHistogram length_diff_histogram(const Corpus& corpus);

// Reverses source token order; target untouched.
SentencePair invert_source(const SentencePair& pair);

// Grapheme (or grapheme cluster) -> replacement map with longest-match-first
// application. Unmapped code points pass through.
class TransliterationTable {
 public:
  TransliterationTable() = default;

  void add(std::string grapheme, std::string replacement);
  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }
  const std::map<std::string, std::string>& entries() const { return map_; }

  std::string apply(std::string_view text) const;

  // Lines `grapheme<TAB>replacement`; blank lines skipped.
  static TransliterationTable parse(std::istream& in);
  static TransliterationTable load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> map_;
  std::size_t max_key_code_points_ = 0;
};

// Transliterates every token on both sides. Tokens that become empty are
// dropped.
SentencePair romanize(const SentencePair& pair, const TransliterationTable& table);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t tune = 0;
  std::size_t test = 0;
};

struct CorpusSplit {
  Corpus train;
  Corpus tune;
  Corpus test;
};

// Seeded random partition; each split keeps the corpus' relative order.
CorpusSplit split_corpus(const Corpus& corpus, const SplitSizes& sizes, std::uint64_t seed);

// Parallel text I/O. Line i of each file forms pair i. Lines are only
// whitespace-tokenized; empty sides are kept so that pair indices stay aligned
// with sidecar files. Throws EncodingError with the offending line number.
Corpus read_parallel(const std::filesystem::path& source, const std::filesystem::path& target);
void write_parallel(const Corpus& corpus, const std::filesystem::path& source,
                    const std::filesystem::path& target);

std::vector<double> read_scores(const std::filesystem::path& path);

}  // namespace pbsmt
