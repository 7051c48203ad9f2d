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

#include <set>
#include <sstream>

#include "doctest.h"
#include "pbsmt/error.hpp"
#include "pbsmt/experiment.hpp"
#include "pbsmt/synthetic.hpp"
#include "test_util.hpp"

using namespace pbsmt;

TEST_CASE("k-fold partitions the indices") {
  for (std::size_t n : {4, 10, 17, 103}) {
    for (std::size_t k : {2, 3, 4}) {
      const auto folds = kfold(n, k, 9);
      REQUIRE(folds.size() == k);
      std::multiset<std::size_t> all;
      for (std::size_t f = 0; f < k; ++f) {
        const std::size_t expected = n / k + (f < n % k ? 1 : 0);
        CHECK(folds[f].test.size() == expected);
        CHECK(folds[f].train.size() == n - expected);
        CHECK(std::is_sorted(folds[f].test.begin(), folds[f].test.end()));
        std::set<std::size_t> both(folds[f].train.begin(), folds[f].train.end());
        both.insert(folds[f].test.begin(), folds[f].test.end());
        CHECK(both.size() == n);
        all.insert(folds[f].test.begin(), folds[f].test.end());
      }
      CHECK(all.size() == n);
      CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == n);
    }
  }
  CHECK(kfold(20, 4, 1)[0].test == kfold(20, 4, 1)[0].test);
  CHECK(kfold(20, 4, 1)[0].test != kfold(20, 4, 2)[0].test);
  CHECK_THROWS_AS(kfold(3, 4, 1), ValidationError);
  CHECK_THROWS_AS(kfold(10, 1, 1), ValidationError);
}

TEST_CASE("mean of fold scores") {
  const std::vector<double> scores = {67.32, 66.32, 64.90, 66.74};
  CHECK(mean(scores) == doctest::Approx(66.32).epsilon(1e-12));
  CHECK_THROWS_AS(mean(std::vector<double>{}), ValidationError);
}

TEST_CASE("variants") {
  CHECK(parse_variant("inverted") == Variant::kInverted);
  CHECK(to_string(Variant::kRomanized) == "romanized");
  CHECK_THROWS_AS(parse_variant("reversed"), ValidationError);
  Corpus c;
  c.pairs.push_back({pbsmt::testing::toks("a b c"), pbsmt::testing::toks("x"), {}});
  CHECK(apply_variant(c, Variant::kInverted, nullptr).pairs[0].source ==
        pbsmt::testing::toks("c b a"));
  CHECK_THROWS_AS(apply_variant(c, Variant::kRomanized, nullptr), ValidationError);
}

TEST_CASE("small experiment is deterministic") {
  ToyOptions opts;
  opts.vocab_size = 25;
  opts.minimal_pairs = 3;
  const auto lang = ToyLanguage::generate(opts);
  const auto corpus = lang.corpus(120, 3);
  ExperimentConfig config;
  config.folds = 3;
  config.system.lm_order = 3;
  const auto a = run_experiment(corpus, {}, nullptr, config);
  const auto b = run_experiment(corpus, {}, nullptr, config);
  REQUIRE(a.fold_bleu.size() == 3);
  CHECK(a.fold_bleu == b.fold_bleu);
  CHECK(a.mean_bleu == doctest::Approx(mean(a.fold_bleu)));
  CHECK(a.config == describe(config));
  const auto table = ToyLanguage::lossy_romanization();
  config.variant = Variant::kRomanized;
  const auto r = run_experiment(corpus, {}, &table, config);
  CHECK(r.fold_bleu.size() == 3);
}

TEST_CASE("fold failures are annotated and keep their type") {
  ToyOptions opts;
  opts.vocab_size = 25;
  opts.minimal_pairs = 3;
  const auto corpus = ToyLanguage::generate(opts).corpus(20, 3);
  ExperimentConfig config;
  config.variant = Variant::kInverted;
  config.folds = 2;
  config.system.lm_order = 0;
  try {
    run_experiment(corpus, {}, nullptr, config);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).rfind("variant inverted fold 1: ", 0) == 0);
  }
  config.folds = 50;
  CHECK_THROWS_AS(run_experiment(corpus, {}, nullptr, config), ValidationError);
}

TEST_CASE("result writers") {
  ExperimentResult a;
  a.variant = Variant::kBaseline;
  a.fold_bleu = {67.32, 66.32};
  a.mean_bleu = 66.82;
  ExperimentResult b;
  b.variant = Variant::kInverted;
  b.fold_bleu = {40.0, 41.256};
  b.mean_bleu = 40.6275;
  const std::vector<ExperimentResult> results = {a, b};
  std::ostringstream csv;
  write_results_csv(csv, results);
  CHECK(csv.str() ==
        "variant,fold,bleu\n"
        "baseline,1,67.32\nbaseline,2,66.32\n"
        "inverted,1,40.00\ninverted,2,41.26\n"
        "baseline,mean,66.82\ninverted,mean,40.63\n");
  std::ostringstream table;
  write_results_table(table, results);
  CHECK(table.str() ==
        "Model                Fold 1   Fold 2  Average\n"
        "SMT baseline          67.32    66.32    66.82\n"
        "SMT inverted          40.00    41.26    40.63\n");
}
