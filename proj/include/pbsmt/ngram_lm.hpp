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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pbsmt/text.hpp"
#include "pbsmt/vocabulary.hpp"

namespace pbsmt {

inline constexpr std::size_t kMaxLmOrder = 8;

// Fixed-capacity word sequence used as n-gram key and LM state.
struct NGram {
  std::array<WordId, kMaxLmOrder> ids{};
  std::uint8_t size = 0;

  NGram() = default;
  NGram(std::span<const WordId> words);

  std::span<const WordId> view() const { return {ids.data(), size}; }
  WordId back() const { return ids[size - 1]; }
  NGram prefix(std::size_t n) const { return NGram(view().first(n)); }
  NGram suffix(std::size_t n) const { return NGram(view().last(n)); }
  NGram dropped_first() const { return suffix(size - 1U); }
  NGram extended(WordId w) const;

  bool operator==(const NGram& other) const;
};

struct NGramHash {
  std::size_t operator()(const NGram& g) const;
};

template <typename V>
using NGramMap = std::unordered_map<NGram, V, NGramHash>;

// Reserved ids shared by counts and models.
inline constexpr WordId kUnkId = 0;
inline constexpr WordId kBosId = 1;
inline constexpr WordId kEosId = 2;
inline constexpr std::string_view kUnkWord = "<unk>";
inline constexpr std::string_view kBosWord = "<s>";
inline constexpr std::string_view kEosWord = "</s>";

Vocabulary make_lm_vocabulary();

struct NGramCounts {
  std::size_t order = 0;
  Vocabulary vocab = make_lm_vocabulary();
  // counts[n-1]: raw counts of n-grams over `<s> w1 .. wk </s>`.
  std::vector<NGramMap<std::uint64_t>> counts;
  // continuation[n-1] for n < order: distinct left extensions N1+(. g).
  std::vector<NGramMap<std::uint64_t>> continuation;

  std::uint64_t count(std::span<const WordId> ngram) const;
  std::uint64_t continuation_count(std::span<const WordId> ngram) const;
};

// Throws ValidationError unless 1 <= order <= kMaxLmOrder.
NGramCounts count_ngrams(const std::vector<Tokens>& sentences, std::size_t order);

struct DiscountOptions {
  enum class Policy { kFixed, kCountOfCounts };
  Policy policy = Policy::kFixed;
  double fixed = 0.75;
};

// Backoff model in log10 space. P(w|h) is the stored value for a stored
// n-gram hw, else backoff(h) * P(w|h') with backoff 1 for unstored contexts.
class NGramModel {
 public:
  struct Entry {
    double log_prob = 0.0;
    double log_backoff = 0.0;
    bool has_backoff = false;
  };

  using State = NGram;

  static constexpr double kMissingLogProb = -99.0;

  std::size_t order() const { return order_; }
  const Vocabulary& vocab() const { return vocab_; }

  // Id of a surface word, kUnkId when unknown.
  WordId id(std::string_view word) const;

  const Entry* find(std::span<const WordId> ngram) const;
  std::size_t ngram_count(std::size_t n) const { return entries_[n - 1].size(); }

  // log10 P(word | context); only the last order-1 context words matter.
  double conditional(std::span<const WordId> context, WordId word) const;

  State begin_state() const;
  // log10 P(word | state); `out` becomes the longest stored suffix of
  // state+word of length at most order-1.
  double score(const State& state, WordId word, State& out) const;

  // log10 probability of `<s> tokens </s>`.
  double score_sentence(const Tokens& tokens) const;

  // Sum of P(w|context) over the vocabulary without <s>.
  double total_probability(std::span<const WordId> context) const;

  // Upper bound of log10 P(word | any context), indexed by word id.
  std::vector<double> max_log_prob_by_word() const;

  // Stored contexts: n-grams carrying a backoff weight.
  std::vector<NGram> contexts() const;

  void write_arpa(std::ostream& out) const;
  static NGramModel read_arpa(std::istream& in);
  void save_arpa(const std::filesystem::path& path) const;
  static NGramModel load_arpa(const std::filesystem::path& path);

 private:
  friend NGramModel estimate_kn(const NGramCounts& counts, const DiscountOptions& discount);

  std::size_t order_ = 0;
  Vocabulary vocab_ = make_lm_vocabulary();
  std::vector<NGramMap<Entry>> entries_;
  std::vector<double> discounts_;
};

// Interpolated Kneser-Ney. The highest order uses raw counts, lower orders
// use continuation counts (raw counts for n-grams starting with <s>), one
// absolute discount per order. Unigrams interpolate with the uniform
// distribution over the vocabulary including <unk>.
NGramModel estimate_kn(const NGramCounts& counts, const DiscountOptions& discount = {});

// 10^(-average log10 probability), averaged over words plus </s>.
double perplexity(const NGramModel& model, const std::vector<Tokens>& sentences);

}  // namespace pbsmt
