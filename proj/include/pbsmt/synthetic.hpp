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
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pbsmt/corpus.hpp"
#include "pbsmt/rng.hpp"

namespace pbsmt {

struct ToyOptions {
  std::size_t vocab_size = 200;
  // Source word pairs that differ only by epsilon vs eta, which the lossy
  // romanization merges.
  std::size_t minimal_pairs = 20;
  std::size_t min_length = 4;
  std::size_t max_length = 10;
  std::uint64_t seed = 7;
};

// Dictionary-substitution language pair: Greek-script source words map one to
// one onto Latin-script target words, word order preserved.
class ToyLanguage {
 public:
  // Throws ValidationError for impossible option combinations.
  static ToyLanguage generate(const ToyOptions& options);

  const std::vector<std::string>& source_words() const { return source_; }
  const std::vector<std::string>& target_words() const { return target_; }
  const std::vector<std::pair<std::string, std::string>>& minimal_pairs() const {
    return minimal_pairs_;
  }

  const std::string& translate(const std::string& source_word) const;

  SentencePair sample(Rng& rng) const;
  Corpus corpus(std::size_t sentences, std::uint64_t seed) const;

  // Letter-by-letter Latin transliteration that merges epsilon and eta.
  static TransliterationTable lossy_romanization();

 private:
  ToyOptions options_;
  std::vector<std::string> source_;
  std::vector<std::string> target_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::pair<std::string, std::string>> minimal_pairs_;
};

}  // namespace pbsmt
