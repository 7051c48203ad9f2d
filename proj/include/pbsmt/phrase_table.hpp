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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pbsmt/alignment.hpp"
#include "pbsmt/corpus.hpp"

namespace pbsmt {

inline constexpr std::size_t kDefaultMaxPhraseLength = 7;

// Half-open source and target spans of one extracted phrase pair.
struct PhraseSpan {
  std::size_t source_begin = 0;
  std::size_t source_end = 0;
  std::size_t target_begin = 0;
  std::size_t target_end = 0;

  auto operator<=>(const PhraseSpan&) const = default;
};

// All span pairs satisfying the consistency criterion with at least one link
// inside, unaligned boundary words included, both sides at most `max_len`.
std::vector<PhraseSpan> extract_spans(const AlignmentMatrix& alignment, std::size_t max_len);

using LocalAlignment = std::vector<std::pair<std::uint8_t, std::uint8_t>>;

struct PhrasePair {
  Tokens source;
  Tokens target;
  // Links relative to the phrase, sorted by (source, target).
  LocalAlignment alignment;
  std::size_t count = 1;
};

std::vector<PhrasePair> extract_phrases(const SentencePair& pair, const AlignmentMatrix& alignment,
                                        std::size_t max_len = kDefaultMaxPhraseLength);

// Four translation features, stored as probabilities in (0,1].
struct PhraseScores {
  double target_given_source = 1.0;      // phi(e|f)
  double lex_target_given_source = 1.0;  // lex(e|f)
  double source_given_target = 1.0;      // phi(f|e)
  double lex_source_given_target = 1.0;  // lex(f|e)

  bool operator==(const PhraseScores&) const = default;
};

struct PhraseOption {
  Tokens target;
  PhraseScores scores;
};

class PhraseTable {
 public:
  void add(const Tokens& source, Tokens target, const PhraseScores& scores);

  // Options for a source phrase, or nullptr.
  const std::vector<PhraseOption>* find(std::span<const std::string> source) const;

  std::size_t source_phrase_count() const { return entries_.size(); }
  std::size_t size() const { return size_; }
  std::size_t max_source_length() const { return max_source_length_; }

  // (source phrase, option) in sorted order.
  std::vector<std::pair<Tokens, PhraseOption>> sorted_entries() const;

  // `src ||| tgt ||| phi(e|f) lex(e|f) phi(f|e) lex(f|e)`.
  void write(std::ostream& out) const;
  static PhraseTable read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static PhraseTable load(const std::filesystem::path& path);

 private:
  static std::string key(std::span<const std::string> source);
  std::unordered_map<std::string, std::vector<PhraseOption>> entries_;
  std::size_t size_ = 0;
  std::size_t max_source_length_ = 0;
};

// Lexical weight lex(e|f,a): per target word the mean of t(e|f) over its
// linked source words, or t(e|NULL) if unlinked, multiplied over the phrase.
// Table values are floored at kProbabilityFloor.
double lexical_weight(const Tokens& source, const Tokens& target, const LocalAlignment& alignment,
                      const TranslationTable& target_given_source);

// Relative-frequency phrase probabilities plus lexical weights computed
// from the most frequent internal alignment (first seen on ties).
// `forward` is t(target|source), `reverse` is t(source|target).
PhraseTable score_phrase_table(std::span<const PhrasePair> extractions,
                               const TranslationTable& forward, const TranslationTable& reverse);

}  // namespace pbsmt
