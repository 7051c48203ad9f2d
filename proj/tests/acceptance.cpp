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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "test_util.hpp"
#include "pbsmt/alignment.hpp"
#include "pbsmt/bleu.hpp"
#include "pbsmt/corpus.hpp"
#include "pbsmt/decoder.hpp"
#include "pbsmt/experiment.hpp"
#include "pbsmt/ngram_lm.hpp"
#include "pbsmt/phrase_table.hpp"
#include "pbsmt/rng.hpp"
#include "pbsmt/synthetic.hpp"

using namespace pbsmt;

namespace {

using Clock = std::chrono::steady_clock;

// Collects failed checks for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ = failed_ || !ok;
  }
  void near(double got, double want, double tol, const std::string& what) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: got %.12g want %.12g (tol %g)", what.c_str(), got, want, tol);
    expect(std::fabs(got - want) <= tol, buf);
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += "; ";
    notes_ += s;
  }
  bool failed() const { return failed_; }
  std::size_t checks() const { return checks_; }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::string& notes() const { return notes_; }

 private:
  bool failed_ = false;
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
  std::string notes_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int decimals) { return format_fixed(v, decimals); }

Corpus make_corpus(const std::vector<std::pair<std::string, std::string>>& pairs) {
  Corpus c;
  for (const auto& [s, t] : pairs) c.pairs.push_back({split_whitespace(s), split_whitespace(t), {}});
  return c;
}

Corpus random_corpus(Rng& rng, std::size_t max_pairs) {
  Corpus c;
  const auto pairs = 1 + rng.below(max_pairs);
  for (std::uint64_t k = 0; k < pairs; ++k) {
    SentencePair p;
    const auto m = 1 + rng.below(6);
    const auto n = 1 + rng.below(6);
    for (std::uint64_t i = 0; i < m; ++i) p.source.push_back("s" + std::to_string(rng.below(7)));
    for (std::uint64_t j = 0; j < n; ++j) p.target.push_back("t" + std::to_string(rng.below(7)));
    c.pairs.push_back(p);
  }
  return c;
}

void ibm1_oracle(Check& c) {
  const auto start = Clock::now();
  const auto corpus = make_corpus({{"das haus", "the house"}, {"das buch", "the book"}});
  const auto converged = train_ibm1(corpus, 20, false);
  c.expect(converged.table.prob("das", "the") > 0.9, "t(the|das) > 0.9");
  c.expect(converged.table.prob("haus", "house") > 0.9, "t(house|haus) > 0.9");
  c.note("t(the|das)=" + fixed(converged.table.prob("das", "the"), 4) +
         " t(house|haus)=" + fixed(converged.table.prob("haus", "house"), 4));

  // Hand-executed EM: iteration 1 and 2 values.
  const auto one = train_ibm1(corpus, 1, false);
  c.near(one.table.prob("das", "the"), 0.5, 1e-9, "iter1 t(the|das)");
  c.near(one.table.prob("das", "house"), 0.25, 1e-9, "iter1 t(house|das)");
  c.near(one.table.prob("haus", "house"), 0.5, 1e-9, "iter1 t(house|haus)");
  const auto two = train_ibm1(corpus, 2, false);
  c.near(two.table.prob("das", "the"), 0.6, 1e-9, "iter2 t(the|das)");
  c.near(two.table.prob("das", "book"), 0.2, 1e-9, "iter2 t(book|das)");
  c.near(two.table.prob("haus", "the"), 3.0 / 7.0, 1e-9, "iter2 t(the|haus)");
  c.near(two.table.prob("buch", "book"), 4.0 / 7.0, 1e-9, "iter2 t(book|buch)");

  // Independent dense EM on the same corpus, with and without NULL.
  for (const bool use_null : {false, true}) {
    for (const int iters : {1, 2}) {
      const auto fast = train_ibm1(corpus, static_cast<std::size_t>(iters), use_null);
      const auto dense = testing::dense_ibm1(corpus, iters, use_null);
      for (const auto& [f, row] : dense.t) {
        for (const auto& [e, v] : row) {
          c.near(fast.table.prob(f, e), v, 1e-9, "dense t(" + e + "|" + f + ")");
        }
      }
    }
  }
  const double secs = seconds_since(start);
  c.expect(secs < 1.0, "runtime " + fixed(secs, 3) + " s >= 1 s");
  c.note("runtime " + fixed(secs, 3) + " s");
}

void em_monotone(Check& c) {
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto corpus = random_corpus(rng, 10);
    const auto r = train_ibm1(corpus, 10, trial % 2 == 0);
    const auto& ll = r.trace.log_likelihood;
    c.expect(ll.size() == 10, "trace length");
    for (std::size_t i = 1; i < ll.size(); ++i) {
      worst = std::min(worst, ll[i] - ll[i - 1]);
      c.expect(ll[i] >= ll[i - 1] - 1e-9, "log-likelihood decreased in trial " + std::to_string(trial));
    }
  }
  c.note("100 corpora, smallest step " + format_double(worst));
}

void extraction_oracle(Check& c) {
  const auto start = Clock::now();
  std::size_t matrices = 0;
  for (std::size_t m = 1; m <= 4; ++m) {
    for (std::size_t n = 1; n <= 4; ++n) {
      SentencePair pair;
      for (std::size_t i = 0; i < m; ++i) pair.source.push_back("f" + std::to_string(i));
      for (std::size_t j = 0; j < n; ++j) pair.target.push_back("e" + std::to_string(j));
      const std::uint32_t cells = static_cast<std::uint32_t>(m * n);
      for (std::uint32_t mask = 0; mask < (1u << cells); ++mask) {
        AlignmentMatrix a(m, n);
        for (std::uint32_t b = 0; b < cells; ++b) {
          if (mask & (1u << b)) a.add(b / n, b % n);
        }
        ++matrices;
        std::set<std::pair<std::string, std::string>> want;
        for (const auto& s : testing::consistent_spans(a, kDefaultMaxPhraseLength)) {
          want.emplace(join(Tokens(pair.source.begin() + s.source_begin,
                                   pair.source.begin() + s.source_end)),
                       join(Tokens(pair.target.begin() + s.target_begin,
                                   pair.target.begin() + s.target_end)));
        }
        std::set<std::pair<std::string, std::string>> got;
        const auto phrases = extract_phrases(pair, a);
        for (const auto& p : phrases) got.emplace(join(p.source), join(p.target));
        c.expect(got == want && phrases.size() == got.size(),
                 std::to_string(m) + "x" + std::to_string(n) + " mask " + std::to_string(mask));
      }
    }
  }
  const double secs = seconds_since(start);
  c.expect(secs < 60.0, "runtime " + fixed(secs, 1) + " s >= 60 s");
  c.note(std::to_string(matrices) + " matrices, " + fixed(secs, 2) + " s");
}

void kn_normalization(Check& c) {
  Rng rng(4);
  std::vector<Tokens> corpus;
  for (int l = 0; l < 100; ++l) {
    Tokens s;
    for (std::uint64_t k = 0, n = 1 + rng.below(10); k < n; ++k) {
      s.push_back("w" + std::to_string(rng.below(20)));
    }
    corpus.push_back(s);
  }
  const auto lm = estimate_kn(count_ngrams(corpus, 3));
  std::vector<std::vector<WordId>> contexts;
  for (const auto& ctx : lm.contexts()) {
    const auto v = ctx.view();
    contexts.emplace_back(v.begin(), v.end());
  }
  rng.shuffle(contexts);
  if (contexts.size() > 700) contexts.resize(700);
  while (contexts.size() < 1000) {
    std::vector<WordId> ctx;
    for (std::uint64_t k = 0, n = 1 + rng.below(2); k < n; ++k) {
      ctx.push_back(lm.id("w" + std::to_string(rng.below(22))));
    }
    contexts.push_back(ctx);
  }
  double worst = 0.0;
  for (const auto& ctx : contexts) {
    const double total = lm.total_probability(ctx);
    worst = std::max(worst, std::fabs(total - 1.0));
    c.expect(std::fabs(total - 1.0) <= 1e-6, "context sum " + format_double(total));
  }
  c.note("1000 contexts, max |sum-1| = " + format_double(worst));

  // Hand value: corpus {a b, c b, a d}, P(b|a) = (1-D)/2 + D*2/2 * P(b)
  // with P(b) = (2-D)/7 + D*5/7/6 over 6 predictable words.
  const auto tiny = estimate_kn(count_ngrams(testing::sentences({"a b", "c b", "a d"}), 2));
  const double unigram_b = (2.0 - 0.75) / 7.0 + 0.75 * 5.0 / 7.0 / 6.0;
  const double hand = (1.0 - 0.75) / 2.0 + 0.75 * 2.0 / 2.0 * unigram_b;
  const std::vector<WordId> ctx_a = {tiny.id("a")};
  c.near(std::pow(10.0, tiny.conditional(ctx_a, tiny.id("b"))), hand, 1e-9, "P(b|a)");

  // Recursive oracle agreement on the 100-sentence model.
  const testing::KnOracle oracle(corpus, 3, 0.75);
  for (int k = 0; k < 200; ++k) {
    testing::Words h;
    for (int i = 0; i < 2; ++i) h.push_back("w" + std::to_string(rng.below(20)));
    const std::string w = "w" + std::to_string(rng.below(20));
    const std::vector<WordId> ids = {lm.id(h[0]), lm.id(h[1])};
    c.near(std::pow(10.0, lm.conditional(ids, lm.id(w))), oracle.prob(h, w), 1e-9, "oracle P");
  }

  std::ostringstream first;
  lm.write_arpa(first);
  std::istringstream in(first.str());
  std::ostringstream second;
  NGramModel::read_arpa(in).write_arpa(second);
  c.expect(first.str() == second.str(), "ARPA round trip differs");
  c.note("ARPA " + std::to_string(first.str().size()) + " bytes round-tripped");
}

void bleu_oracle(Check& c) {
  struct Case {
    std::vector<std::string> hyp;
    std::vector<std::string> ref;
    double want;
    const char* name;
  };
  // Each expectation computed by hand from clipped counts; zero-match orders
  // use 1/(2^k * total), orders with no n-grams are left out of the mean.
  const std::vector<Case> cases = {
      {{"the cat sat on the mat"}, {"the cat sat on the mat"}, 100.0, "identity"},
      {{"the the the the"},
       {"the cat"},
       100.0 * std::pow(0.25 * (1.0 / 6.0) * (1.0 / 8.0) * (1.0 / 8.0), 0.25),
       "clipping"},
      {{"a b c d e f g h i"}, {"a b c d e f g h i j"}, 100.0 * std::exp(1.0 - 10.0 / 9.0), "brevity 9 vs 10"},
      {{"a b c d"}, {"a b c e"}, 100.0 * std::pow(0.75 * (2.0 / 3.0) * 0.5 * 0.5, 0.25), "last word wrong"},
      {{"a b", "c d e"},
       {"a b", "c x e"},
       100.0 * std::pow((4.0 / 5.0) * (1.0 / 3.0) * (1.0 / 2.0), 1.0 / 3.0),
       "two sentences"},
      {{"a b c d e"}, {"a b c d"}, 100.0 * std::pow(0.8 * 0.75 * (2.0 / 3.0) * 0.5, 0.25), "extra word"},
      {{"d c b a"}, {"a b c d"}, 100.0 * std::pow(1.0 * (1.0 / 6.0) * (1.0 / 8.0) * (1.0 / 8.0), 0.25), "reversed"},
      {{"a b"}, {"a b c d"}, 100.0 * std::exp(1.0 - 2.0) * std::pow(1.0 * 1.0, 0.5), "short"},
      {{"x y z"}, {"a b c"}, 100.0 * std::pow((1.0 / 6.0) * (1.0 / 8.0) * (1.0 / 8.0), 1.0 / 3.0), "disjoint"},
      {{""}, {"a b c"}, 0.0, "empty hypothesis"},
  };
  for (const auto& k : cases) {
    std::vector<Tokens> hyps;
    std::vector<Tokens> refs;
    for (const auto& h : k.hyp) hyps.push_back(split_whitespace(h));
    for (const auto& r : k.ref) refs.push_back(split_whitespace(r));
    const auto report = bleu(hyps, refs);
    c.near(report.score, k.want, 0.01, k.name);
  }
  c.note(std::to_string(cases.size()) + " cases");
}

void decoder_exactness(Check& c) {
  Rng rng(6);
  DecoderParams exhaustive;
  exhaustive.stack_size = 1000000;
  exhaustive.beam_threshold = 0.0;
  exhaustive.max_options = 0;
  exhaustive.distortion_limit = -1;
  std::size_t derivations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto toy = testing::random_toy(rng);
    const auto sentence = testing::random_sentence(rng, 5);
    const auto weights = testing::random_weights(rng);
    auto params = exhaustive;
    params.distortion_limit = trial % 3 == 0 ? -1 : static_cast<int>(trial % 3);
    const Decoder decoder(toy.table, toy.lm, weights, params);
    const auto got = decoder.decode(sentence);
    const auto want = testing::brute_force(sentence, decoder.options(sentence), toy.lm, weights, params);
    derivations += want.derivations;
    c.near(got.score, want.score, 1e-9 * std::max(1.0, std::fabs(want.score)), "best score");
    c.expect(got.tokens == want.output, "best string '" + join(got.tokens) + "' vs '" +
                                            join(want.output) + "'");

    DecoderParams small;
    small.stack_size = 10;
    DecoderParams large;
    large.stack_size = 100;
    const auto a = Decoder(toy.table, toy.lm, weights, small).decode(sentence);
    const auto b = Decoder(toy.table, toy.lm, weights, large).decode(sentence);
    c.expect(b.score >= a.score - 1e-9, "stack 100 scored below stack 10");
  }
  c.note("50 sentences, " + std::to_string(derivations) + " derivations enumerated");
}

void toy_pipeline(Check& c) {
  const auto start = Clock::now();
  ToyOptions opts;
  opts.vocab_size = 200;
  const auto lang = ToyLanguage::generate(opts);
  const auto train = lang.corpus(5000, 11);
  const auto test = lang.corpus(500, 12);
  SystemConfig config;
  config.threads = 4;
  const auto system = train_system(train, {}, config);
  const Decoder decoder(system.table, system.lm, config.weights, config.decoder);
  const auto sources = test.sources();
  std::vector<Tokens> hyps;
  for (auto& t : decode_all(decoder, sources, config.threads)) hyps.push_back(std::move(t.tokens));
  const auto refs = test.targets();
  const auto report = bleu(hyps, refs);
  const double secs = seconds_since(start);
  c.expect(report.score >= 95.0, "BLEU " + fixed(report.score, 2) + " < 95.00");
  c.expect(secs < 300.0, "runtime " + fixed(secs, 1) + " s >= 300 s");
  c.note("BLEU " + fixed(report.score, 2) + ", " + fixed(secs, 1) + " s");
}

void experiment_direction(Check& c) {
  ToyOptions opts;
  opts.vocab_size = 200;
  const auto lang = ToyLanguage::generate(opts);
  const auto corpus = lang.corpus(2000, 13);
  const auto table = ToyLanguage::lossy_romanization();
  ExperimentConfig config;
  config.folds = 4;
  config.seed = 1;
  config.system.decoder.distortion_limit = 0;
  config.system.threads = 4;
  double scores[3];
  const Variant variants[3] = {Variant::kBaseline, Variant::kRomanized, Variant::kInverted};
  for (int v = 0; v < 3; ++v) {
    config.variant = variants[v];
    scores[v] = run_experiment(corpus, {}, &table, config).mean_bleu;
  }
  c.expect(scores[0] - scores[2] >= 20.0,
           "baseline - inverted = " + fixed(scores[0] - scores[2], 2) + " < 20");
  c.expect(scores[1] <= scores[0], "romanized " + fixed(scores[1], 2) + " > baseline");
  c.note("baseline " + fixed(scores[0], 2) + ", romanized " + fixed(scores[1], 2) +
         ", inverted " + fixed(scores[2], 2));
}

void crossval_harness(Check& c) {
  for (const std::size_t n : {8, 5, 2000}) {
    const std::size_t k = n == 5 ? 2 : 4;
    const auto folds = kfold(n, k, 1);
    std::vector<int> seen(n, 0);
    std::size_t largest = 0;
    std::size_t smallest = n;
    for (const auto& f : folds) {
      for (const auto i : f.test) ++seen[i];
      largest = std::max(largest, f.test.size());
      smallest = std::min(smallest, f.test.size());
      std::set<std::size_t> all(f.train.begin(), f.train.end());
      for (const auto i : f.test) c.expect(all.insert(i).second, "test index also in train");
      c.expect(all.size() == n, "train and test do not cover the pool");
    }
    for (std::size_t i = 0; i < n; ++i) c.expect(seen[i] == 1, "index not in exactly one fold");
    c.expect(largest - smallest <= 1, "fold sizes differ by more than 1");
  }
  const std::vector<double> literals = {67.32, 66.32, 64.90, 66.74};
  const double m = mean(literals);
  c.near(m, (67.32 + 66.32 + 64.90 + 66.74) / 4.0, 1e-9, "mean of fold literals");
  c.expect(fixed(m, 2) == "66.32", "mean prints as " + fixed(m, 2));
  c.note("mean of 67.32/66.32/64.90/66.74 = " + fixed(m, 2));
}

void length_analysis(Check& c) {
  const std::filesystem::path dir = PBSMT_TEST_DATA_DIR;
  const auto corpus = read_parallel(dir / "example_pairs.fa", dir / "example_pairs.hi");
  const auto h = length_diff_histogram(corpus);
  using H = LengthDiffHistogram;
  c.note("example histogram {0: " + std::to_string(h.counts[H::kIdentical]) +
         ", 1-3: " + std::to_string(h.counts[H::kOneToThree]) +
         ", 4-5: " + std::to_string(h.counts[H::kFourToFive]) +
         ", >=6: " + std::to_string(h.counts[H::kSixOrMore]) + "}, <3 = " +
         fixed(h.below_three_percent(), 2) + "%");
  c.expect(h.counts[H::kIdentical] == 2 && h.counts[H::kOneToThree] == 2 &&
               h.counts[H::kFourToFive] == 2 && h.counts[H::kSixOrMore] == 0,
           "example histogram is not {0: 2, 1-3: 2, 4-5: 2}");

  Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    Corpus r;
    for (std::uint64_t i = 0, n = 1 + rng.below(60); i < n; ++i) {
      SentencePair p;
      for (std::uint64_t k = 0, a = 1 + rng.below(20); k < a; ++k) p.source.push_back("x");
      for (std::uint64_t k = 0, b = 1 + rng.below(20); k < b; ++k) p.target.push_back("y");
      r.pairs.push_back(p);
    }
    const auto g = length_diff_histogram(r);
    std::uint64_t sum = 0;
    std::uint64_t below = 0;
    for (const auto v : g.counts) sum += v;
    for (const auto& p : r.pairs) {
      const auto a = p.source.size();
      const auto b = p.target.size();
      below += (a > b ? a - b : b - a) < 3;
    }
    c.expect(sum == r.size() && g.total == r.size(), "categories do not partition the corpus");
    c.expect(g.below_three == below, "<3 count differs from direct count");
    c.near(g.below_three_percent(), 100.0 * static_cast<double>(below) / static_cast<double>(r.size()),
           1e-9, "<3 percent");
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
      {"IBM Model 1 oracle", ibm1_oracle},
      {"EM monotonicity", em_monotone},
      {"phrase extraction oracle", extraction_oracle},
      {"KN LM normalization", kn_normalization},
      {"BLEU oracle", bleu_oracle},
      {"decoder exactness", decoder_exactness},
      {"end-to-end toy pipeline", toy_pipeline},
      {"experiment direction", experiment_direction},
      {"cross-validation harness", crossval_harness},
      {"length analysis", length_analysis},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %2zu %-26s %s  (%zu checks) %s\n", i + 1, criteria[i].first,
                c.failed() ? "FAIL" : "PASS", c.checks(), c.notes().c_str());
    for (const auto& f : c.failures()) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    failed += c.failed();
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
