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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pbsmt/ngram_lm.hpp"
#include "pbsmt/phrase_table.hpp"
#include "pbsmt/text.hpp"

namespace pbsmt {

enum Feature : std::size_t {
  kTargetGivenSource,
  kLexTargetGivenSource,
  kSourceGivenTarget,
  kLexSourceGivenTarget,
  kLanguageModel,
  kWordPenalty,
  kPhrasePenalty,
  kDistortion,
  kOov,
  kNumFeatures
};

using FeatureVector = std::array<double, kNumFeatures>;

std::string_view feature_name(std::size_t f);
std::optional<std::size_t> feature_index(std::string_view name);

double dot(const FeatureVector& a, const FeatureVector& b);

// Log-linear weights. Defaults are 1.0 except the word penalty (0.0).
struct FeatureWeights {
  FeatureVector values{1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0};

  double& operator[](std::size_t f) { return values[f]; }
  double operator[](std::size_t f) const { return values[f]; }
  bool operator==(const FeatureWeights&) const = default;

  // `name = value` lines; '#' comments and blank lines ignored. Features not
  // mentioned keep their defaults.
  void write(std::ostream& out) const;
  static FeatureWeights read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static FeatureWeights load(const std::filesystem::path& path);
};

struct DecoderParams {
  std::size_t stack_size = 100;
  // Hypotheses below best * threshold (in probability) are pruned; 0 disables.
  double beam_threshold = 1e-5;
  // Maximum |start of phrase - end of previous phrase|; negative = unlimited.
  int distortion_limit = 6;
  std::size_t max_phrase_length = kDefaultMaxPhraseLength;
  // Options kept per source span, best first; 0 keeps all.
  std::size_t max_options = 20;
  // Cost in log10 units of copying one unknown source word.
  double oov_penalty = 10.0;
  bool future_cost = true;
};

struct DerivationStep {
  std::size_t source_begin = 0;
  std::size_t source_end = 0;
  Tokens target;
  PhraseScores scores;
  bool oov = false;
};

struct Translation {
  Tokens tokens;
  FeatureVector features{};
  double score = 0.0;
  std::vector<DerivationStep> steps;
};

// Feature values of a derivation computed from scratch.
FeatureVector derivation_features(const std::vector<DerivationStep>& steps,
                                  const NGramModel& lm, const DecoderParams& params);

class Decoder {
 public:
  Decoder(const PhraseTable& table, const NGramModel& lm, FeatureWeights weights,
          DecoderParams params = {});

  // Throws DecodeError when no full-coverage hypothesis survives.
  Translation decode(const Tokens& sentence) const;

  // Up to n distinct translations, best first.
  std::vector<Translation> nbest(const Tokens& sentence, std::size_t n) const;

  const FeatureWeights& weights() const { return weights_; }
  const DecoderParams& params() const { return params_; }

  // All translation options of a sentence, as (span, step) pairs the search
  // uses. Exposed for exhaustive checks.
  std::vector<DerivationStep> options(const Tokens& sentence) const;

 private:
  const PhraseTable& table_;
  const NGramModel& lm_;
  FeatureWeights weights_;
  DecoderParams params_;
  std::vector<double> lm_upper_bound_;
};

// Decodes every sentence on `threads` workers. A failed sentence rethrows as
// DecodeError naming its index.
std::vector<Translation> decode_all(const Decoder& decoder, const std::vector<Tokens>& sentences,
                                    std::size_t threads);

// `sent-id ||| translation ||| name:value ... ||| score`.
void write_nbest(std::ostream& out, std::size_t sentence_id, const std::vector<Translation>& list);

struct NBestEntry {
  std::size_t sentence_id = 0;
  Tokens tokens;
  FeatureVector features{};
  double score = 0.0;
};

std::vector<NBestEntry> read_nbest(std::istream& in);

}  // namespace pbsmt
