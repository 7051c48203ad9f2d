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

#include "pbsmt/synthetic.hpp"

#include <array>
#include <string_view>
#include <unordered_set>

#include "pbsmt/error.hpp"

namespace pbsmt {
namespace {

struct Letter {
  std::string_view greek;
  std::string_view latin;
};

constexpr std::array<Letter, 24> kAlphabet = {{
    {"α", "a"}, {"β", "b"}, {"γ", "g"}, {"δ", "d"}, {"ε", "e"}, {"ζ", "z"},
    {"η", "e"}, {"θ", "j"}, {"ι", "i"}, {"κ", "k"}, {"λ", "l"}, {"μ", "m"},
    {"ν", "n"}, {"ξ", "x"}, {"ο", "o"}, {"π", "p"}, {"ρ", "r"}, {"σ", "s"},
    {"τ", "t"}, {"υ", "u"}, {"φ", "f"}, {"χ", "q"}, {"ψ", "y"}, {"ω", "w"},
}};

constexpr std::size_t kEpsilon = 4;
constexpr std::size_t kEta = 6;

std::string romanized(const std::vector<std::size_t>& letters) {
  std::string out;
  for (auto l : letters) out += kAlphabet[l].latin;
  return out;
}

std::string greek(const std::vector<std::size_t>& letters) {
  std::string out;
  for (auto l : letters) out += kAlphabet[l].greek;
  return out;
}

}  // namespace

ToyLanguage ToyLanguage::generate(const ToyOptions& options) {
  if (options.vocab_size < 2) throw ValidationError("toy vocabulary needs at least 2 words");
  if (2 * options.minimal_pairs > options.vocab_size) {
    throw ValidationError("more minimal-pair words than vocabulary");
  }
  if (options.min_length < 1 || options.min_length > options.max_length) {
    throw ValidationError("toy sentence lengths must satisfy 1 <= min <= max");
  }

  ToyLanguage lang;
  lang.options_ = options;
  Rng rng(options.seed);
  std::unordered_set<std::string> romanized_seen;
  std::unordered_set<std::string> target_seen;

  const auto random_letters = [&](std::size_t len) {
    std::vector<std::size_t> letters(len);
    for (auto& l : letters) {
      do {
        l = rng.below(kAlphabet.size());
      } while (l == kEta);
    }
    return letters;
  };
  const auto add_source = [&](const std::vector<std::size_t>& letters) {
    lang.index_.emplace(greek(letters), lang.source_.size());
    lang.source_.push_back(greek(letters));
  };

  // Minimal pairs: a word with an epsilon and its copy with that epsilon
  // turned into eta. Other words never contain eta, so romanized forms are
  // unique apart from these pairs.
  while (lang.minimal_pairs_.size() < options.minimal_pairs) {
    auto letters = random_letters(3 + rng.below(4));
    letters[rng.below(letters.size())] = kEpsilon;
    if (!romanized_seen.insert(romanized(letters)).second) continue;
    auto twin = letters;
    for (auto& l : twin) {
      if (l == kEpsilon) {
        l = kEta;
        break;
      }
    }
    add_source(letters);
    add_source(twin);
    lang.minimal_pairs_.emplace_back(greek(letters), greek(twin));
  }
  while (lang.source_.size() < options.vocab_size) {
    const auto letters = random_letters(3 + rng.below(4));
    if (!romanized_seen.insert(romanized(letters)).second) continue;
    add_source(letters);
  }
  while (lang.target_.size() < options.vocab_size) {
    std::string word;
    const std::size_t len = 3 + rng.below(5);
    for (std::size_t i = 0; i < len; ++i) word += static_cast<char>('a' + rng.below(26));
    // Keep target words disjoint from romanized source words as well.
    if (romanized_seen.count(word) || !target_seen.insert(word).second) continue;
    lang.target_.push_back(word);
  }
  return lang;
}

const std::string& ToyLanguage::translate(const std::string& source_word) const {
  const auto it = index_.find(source_word);
  if (it == index_.end()) throw ValidationError("'" + source_word + "' is not a toy word");
  return target_[it->second];
}

SentencePair ToyLanguage::sample(Rng& rng) const {
  SentencePair pair;
  const std::size_t len =
      options_.min_length + rng.below(options_.max_length - options_.min_length + 1);
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t w = rng.below(source_.size());
    pair.source.push_back(source_[w]);
    pair.target.push_back(target_[w]);
  }
  return pair;
}

Corpus ToyLanguage::corpus(std::size_t sentences, std::uint64_t seed) const {
  Corpus c;
  c.source_lang = "toy-src";
  c.target_lang = "toy-tgt";
  Rng rng(seed);
  for (std::size_t i = 0; i < sentences; ++i) c.pairs.push_back(sample(rng));
  return c;
}

TransliterationTable ToyLanguage::lossy_romanization() {
  TransliterationTable table;
  for (const auto& l : kAlphabet) table.add(std::string(l.greek), std::string(l.latin));
  return table;
}

}  // namespace pbsmt
