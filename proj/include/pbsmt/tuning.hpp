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
#include <vector>

#include "pbsmt/bleu.hpp"
#include "pbsmt/decoder.hpp"
#include "pbsmt/rng.hpp"

namespace pbsmt {

struct TuneCandidate {
  Tokens tokens;
  FeatureVector features{};
  BleuStats stats;
};

// One list per tune sentence.
using CandidatePool = std::vector<std::vector<TuneCandidate>>;

// Corpus BLEU of the per-sentence argmax under `weights` (first candidate wins ties).
double pool_bleu(const CandidatePool& pool, const FeatureWeights& weights);

struct LineSearchResult {
  double value = 0.0;
  double bleu = 0.0;
};

// Exact maximization of pool BLEU along one weight, all others fixed, via the
// upper envelope of each sentence's candidate lines. Picks the middle of the
// best interval; keeps the current value when its interval is among the best.
LineSearchResult line_search(const CandidatePool& pool, const FeatureWeights& weights,
                             std::size_t feature);

// Coordinate ascent from `start` and from `restarts` random points in [-1, 1].
FeatureWeights optimize_weights(const CandidatePool& pool, const FeatureWeights& start,
                                std::size_t restarts, Rng& rng);

struct TuneOptions {
  std::size_t iterations = 5;
  std::size_t nbest = 100;
  std::size_t restarts = 5;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct TuneResult {
  FeatureWeights weights;
  double initial_bleu = 0.0;  // on the final merged lists
  double final_bleu = 0.0;
  std::size_t iterations = 0;
  std::size_t pool_size = 0;
};

// Alternates n-best decoding of the tune set with weight optimization on the
// merged lists. Returns the initial weights unless the optimized ones score
// strictly higher. Throws TuningError when more than half of the sentences
// fail to decode.
TuneResult tune_weights(const std::vector<Tokens>& sources, const std::vector<Tokens>& references,
                        const PhraseTable& table, const NGramModel& lm,
                        const DecoderParams& params, const FeatureWeights& initial,
                        const TuneOptions& options = {});

}  // namespace pbsmt
