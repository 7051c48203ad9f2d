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
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbsmt/alignment.hpp"
#include "pbsmt/bleu.hpp"
#include "pbsmt/corpus.hpp"
#include "pbsmt/decoder.hpp"
#include "pbsmt/ngram_lm.hpp"
#include "pbsmt/phrase_table.hpp"
#include "pbsmt/tuning.hpp"

namespace pbsmt {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded k-way partition of [0, n). The first n mod k folds get one extra
// index. Index lists are sorted. Throws ValidationError unless k >= 2 and n >= k.
std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

double mean(std::span<const double> values);

struct SystemConfig {
  std::size_t ibm1_iterations = 10;
  std::size_t ibm2_iterations = 0;
  bool use_null = true;
  Symmetrization heuristic = Symmetrization::kGrowDiagFinal;
  std::size_t max_phrase_length = kDefaultMaxPhraseLength;
  std::size_t lm_order = 5;
  DiscountOptions discount;
  DecoderParams decoder;
  FeatureWeights weights;
  bool tune = false;
  TuneOptions tuning;
  std::size_t threads = 1;
};

struct TrainedSystem {
  PhraseTable table;
  NGramModel lm;
};

struct AlignedCorpus {
  TranslationTable forward;  // t(target | source)
  TranslationTable reverse;  // t(source | target)
  std::vector<AlignmentMatrix> alignments;
};

AlignedCorpus align_corpus(const Corpus& corpus, const SystemConfig& config);

// Word alignment, phrase extraction and scoring on `train`; the LM is
// estimated on the train targets plus `lm_text`.
TrainedSystem train_system(const Corpus& train, std::span<const Tokens> lm_text,
                           const SystemConfig& config);

enum class Variant { kBaseline, kRomanized, kInverted };

Variant parse_variant(std::string_view name);
std::string_view to_string(Variant v);

// baseline: identity; romanized: both sides transliterated; inverted: source
// token order reversed.
Corpus apply_variant(const Corpus& corpus, Variant variant, const TransliterationTable* table);

struct ExperimentConfig {
  Variant variant = Variant::kBaseline;
  std::size_t folds = 4;
  std::uint64_t seed = 1;
  SystemConfig system;
  // Share of each training fold held out for tuning when system.tune is set.
  double tune_fraction = 0.1;
};

// Human-readable `key=value` listing of every setting.
std::string describe(const ExperimentConfig& config);

struct ExperimentResult {
  Variant variant = Variant::kBaseline;
  std::vector<double> fold_bleu;
  std::vector<BleuReport> fold_reports;
  double mean_bleu = 0.0;
  std::string config;
};

// k-fold cross-validation of the full pipeline, retraining per fold.
// `lm_text` is extra monolingual target text, transformed like the corpus.
// Errors are rethrown with the variant and fold prepended.
ExperimentResult run_experiment(const Corpus& corpus, std::span<const Tokens> lm_text,
                                const TransliterationTable* table, const ExperimentConfig& config);

// `variant,fold,bleu` rows then one `variant,mean,bleu` row per result.
void write_results_csv(std::ostream& out, std::span<const ExperimentResult> results);

// Fixed-width table, one row per variant, one column per fold plus average.
void write_results_table(std::ostream& out, std::span<const ExperimentResult> results);

}  // namespace pbsmt
