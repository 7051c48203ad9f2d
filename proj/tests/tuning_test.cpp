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

#include <algorithm>

#include "doctest.h"
#include "pbsmt/error.hpp"
#include "pbsmt/experiment.hpp"
#include "pbsmt/synthetic.hpp"
#include "pbsmt/tuning.hpp"
#include "test_util.hpp"

using namespace pbsmt;
using pbsmt::testing::toks;

namespace {

TuneCandidate candidate(const std::string& hyp, const std::string& ref, FeatureVector features) {
  return {toks(hyp), features, sentence_stats(toks(hyp), toks(ref))};
}

CandidatePool random_pool(Rng& rng) {
  const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  CandidatePool pool(1 + rng.below(6));
  for (auto& list : pool) {
    Tokens ref;
    for (std::uint64_t i = 0, n = 2 + rng.below(5); i < n; ++i) ref.push_back(words[rng.below(5)]);
    for (std::uint64_t c = 0, n = 1 + rng.below(8); c < n; ++c) {
      Tokens hyp;
      for (std::uint64_t i = 0, m = 1 + rng.below(6); i < m; ++i) hyp.push_back(words[rng.below(5)]);
      FeatureVector f{};
      for (auto& v : f) v = static_cast<double>(rng.between(-20, 20)) / 4.0;
      list.push_back({hyp, f, sentence_stats(hyp, ref)});
    }
  }
  return pool;
}

}  // namespace

TEST_CASE("line search flips to the better candidate") {
  FeatureVector good{};
  FeatureVector bad{};
  bad[kLanguageModel] = 1.0;
  good[kDistortion] = -0.5;
  CandidatePool pool{{candidate("x", "a b c d", bad), candidate("a b c d", "a b c d", good)}};
  FeatureWeights w;
  CHECK(pool_bleu(pool, w) < 10.0);
  const auto r = line_search(pool, w, kLanguageModel);
  CHECK(r.bleu == doctest::Approx(100.0));
  CHECK(r.value < -0.5);
  w[kLanguageModel] = r.value;
  CHECK(pool_bleu(pool, w) == doctest::Approx(100.0));
}

TEST_CASE("line search keeps the current value when nothing is better") {
  CandidatePool pool{{candidate("a b", "a b", {}), candidate("c", "a b", {})}};
  pool[0][0].features[kOov] = 1.0;
  FeatureWeights w;
  const auto r = line_search(pool, w, kOov);
  CHECK(r.value == 1.0);
  CHECK(r.bleu == doctest::Approx(100.0));
}

TEST_CASE("line search matches a dense grid scan") {
  Rng rng(211);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pool = random_pool(rng);
    FeatureWeights w;
    for (auto& v : w.values) v = rng.uniform(-1.0, 1.0);
    const auto f = static_cast<std::size_t>(rng.below(kNumFeatures));
    const auto r = line_search(pool, w, f);
    double grid_best = -1.0;
    for (int g = -4000; g <= 4000; ++g) {
      FeatureWeights probe = w;
      probe[f] = g / 100.0 + 0.003;
      grid_best = std::max(grid_best, pool_bleu(pool, probe));
    }
    CHECK(r.bleu >= grid_best - 1e-9);
    FeatureWeights chosen = w;
    chosen[f] = r.value;
    CHECK(pool_bleu(pool, chosen) == doctest::Approx(r.bleu).epsilon(1e-9));
  }
}

TEST_CASE("coordinate ascent never lowers pool BLEU") {
  Rng rng(223);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pool = random_pool(rng);
    FeatureWeights start;
    const auto tuned = optimize_weights(pool, start, 3, rng);
    CHECK(pool_bleu(pool, tuned) >= pool_bleu(pool, start) - 1e-12);
  }
}

TEST_CASE("tuning on a toy system is deterministic and not worse") {
  ToyOptions opts;
  opts.vocab_size = 30;
  opts.minimal_pairs = 3;
  const auto lang = ToyLanguage::generate(opts);
  const auto train = lang.corpus(300, 5);
  const auto tune = lang.corpus(20, 6);
  SystemConfig config;
  config.lm_order = 3;
  const auto system = train_system(train, {}, config);
  FeatureWeights initial;
  initial[kLanguageModel] = 0.2;
  TuneOptions topts;
  topts.iterations = 2;
  topts.nbest = 20;
  topts.restarts = 2;
  const auto a = tune_weights(tune.sources(), tune.targets(), system.table, system.lm,
                              config.decoder, initial, topts);
  const auto b = tune_weights(tune.sources(), tune.targets(), system.table, system.lm,
                              config.decoder, initial, topts);
  CHECK(a.weights == b.weights);
  CHECK(a.final_bleu == b.final_bleu);
  CHECK(a.final_bleu >= a.initial_bleu);
  CHECK(a.pool_size > 0);
}

TEST_CASE("tuning input validation") {
  PhraseTable table;
  const auto lm = estimate_kn(count_ngrams({toks("x")}, 1));
  CHECK_THROWS_AS(tune_weights({}, {}, table, lm, {}, {}), ValidationError);
  CHECK_THROWS_AS(tune_weights({toks("a")}, {}, table, lm, {}, {}), SizeError);
}
