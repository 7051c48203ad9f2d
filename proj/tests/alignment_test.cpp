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

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pbsmt/alignment.hpp"
#include "pbsmt/error.hpp"
#include "pbsmt/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace pbsmt;
using pbsmt::testing::toks;

using pbsmt::testing::dense_ibm1;

namespace {

Corpus make_corpus(const std::vector<std::pair<std::string, std::string>>& pairs) {
  Corpus c;
  for (const auto& [s, t] : pairs) c.pairs.push_back({toks(s), toks(t), {}});
  return c;
}

void check_matches_dense(const Corpus& corpus, int iterations, bool use_null) {
  const auto r = train_ibm1(corpus, static_cast<std::size_t>(iterations), use_null);
  const auto d = dense_ibm1(corpus, iterations, use_null);
  for (const auto& [f, row] : d.t) {
    for (const auto& [e, v] : row) CHECK(r.table.prob(f, e) == doctest::Approx(v).epsilon(1e-9));
  }
  REQUIRE(r.trace.log_likelihood.size() == d.log_likelihood.size());
  for (std::size_t i = 0; i < d.log_likelihood.size(); ++i) {
    CHECK(r.trace.log_likelihood[i] == doctest::Approx(d.log_likelihood[i]).epsilon(1e-12));
  }
}

Corpus random_corpus(Rng& rng, std::size_t max_pairs) {
  Corpus c;
  const auto pairs = 1 + rng.below(max_pairs);
  for (std::uint64_t k = 0; k < pairs; ++k) {
    SentencePair p;
    const auto m = 1 + rng.below(5);
    const auto n = 1 + rng.below(5);
    for (std::uint64_t i = 0; i < m; ++i) p.source.push_back("s" + std::to_string(rng.below(6)));
    for (std::uint64_t j = 0; j < n; ++j) p.target.push_back("t" + std::to_string(rng.below(6)));
    c.pairs.push_back(p);
  }
  return c;
}

// grow-diag-final written against sets of (target, source) points, following
// the textbook pseudocode line by line.
std::set<std::pair<std::size_t, std::size_t>> textbook_gdf(const AlignmentMatrix& e2f,
                                                           const AlignmentMatrix& f2e) {
  using Point = std::pair<std::size_t, std::size_t>;  // (e, f)
  const long en = static_cast<long>(e2f.target_len());
  const long fn = static_cast<long>(e2f.source_len());
  std::set<Point> a1;
  std::set<Point> a2;
  for (auto [i, j] : e2f.links()) a1.insert({j, i});
  for (auto [i, j] : f2e.links()) a2.insert({j, i});
  std::set<Point> uni = a1;
  uni.insert(a2.begin(), a2.end());
  std::set<Point> alignment;
  for (const auto& p : a1) {
    if (a2.count(p)) alignment.insert(p);
  }
  const auto e_aligned = [&](std::size_t e) {
    for (const auto& p : alignment) {
      if (p.first == e) return true;
    }
    return false;
  };
  const auto f_aligned = [&](std::size_t f) {
    for (const auto& p : alignment) {
      if (p.second == f) return true;
    }
    return false;
  };
  const int neighboring[8][2] = {{-1, 0}, {0, -1}, {1, 0}, {0, 1},
                                 {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  bool added = true;
  while (added) {
    added = false;
    for (long e = 0; e < en; ++e) {
      for (long f = 0; f < fn; ++f) {
        if (!alignment.count({e, f})) continue;
        for (const auto& nb : neighboring) {
          const long e_new = e + nb[0];
          const long f_new = f + nb[1];
          if (e_new < 0 || f_new < 0 || e_new >= en || f_new >= fn) continue;
          const Point p{e_new, f_new};
          if ((!e_aligned(p.first) || !f_aligned(p.second)) && uni.count(p)) {
            alignment.insert(p);
            added = true;
          }
        }
      }
    }
  }
  for (const auto* a : {&a1, &a2}) {
    for (long e = 0; e < en; ++e) {
      for (long f = 0; f < fn; ++f) {
        const Point p{e, f};
        if ((!e_aligned(p.first) || !f_aligned(p.second)) && a->count(p)) alignment.insert(p);
      }
    }
  }
  std::set<Point> out;
  for (const auto& [e, f] : alignment) out.insert({f, e});
  return out;
}

}  // namespace

TEST_CASE("IBM1 first two iterations match hand computation") {
  const auto corpus = make_corpus({{"das haus", "the house"}, {"das buch", "the book"}});
  const auto one = train_ibm1(corpus, 1, false);
  CHECK(one.table.prob("das", "the") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(one.table.prob("das", "house") == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(one.table.prob("das", "book") == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(one.table.prob("haus", "the") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(one.table.prob("haus", "house") == doctest::Approx(0.5).epsilon(1e-12));
  const auto two = train_ibm1(corpus, 2, false);
  CHECK(two.table.prob("das", "the") == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(two.table.prob("das", "house") == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(two.table.prob("haus", "the") == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(two.table.prob("haus", "house") == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(two.table.prob("haus", "book") == 0.0);
}

TEST_CASE("IBM1 converges on the das/haus corpus") {
  const auto corpus = make_corpus({{"das haus", "the house"}, {"das buch", "the book"}});
  const auto r = train_ibm1(corpus, 20, false);
  CHECK(r.table.prob("das", "the") > 0.9);
  CHECK(r.table.prob("haus", "house") > 0.9);
  CHECK(r.table.prob("buch", "book") > 0.9);
}

TEST_CASE("IBM1 equals dense EM on random corpora") {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const auto corpus = random_corpus(rng, 8);
    check_matches_dense(corpus, 5, trial % 2 == 0);
  }
}

TEST_CASE("IBM1 rows stay normalized and likelihood does not decrease") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto corpus = random_corpus(rng, 10);
    const auto r = train_ibm1(corpus, 10, true);
    for (std::size_t k = 1; k < r.trace.log_likelihood.size(); ++k) {
      CHECK(r.trace.log_likelihood[k] >= r.trace.log_likelihood[k - 1] - 1e-9);
    }
    for (WordId g = 0; g < r.table.given_vocab().size(); ++g) {
      CHECK(r.table.row_sum(g) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("IBM1 rejects an empty corpus") {
  CHECK_THROWS_AS(train_ibm1(Corpus{}, 3), ValidationError);
}

TEST_CASE("IBM2 likelihood does not decrease") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto corpus = random_corpus(rng, 10);
    const auto m1 = train_ibm1(corpus, 3, true);
    const auto m2 = train_ibm2(corpus, m1.table, 8, true);
    for (std::size_t k = 1; k < m2.trace.log_likelihood.size(); ++k) {
      CHECK(m2.trace.log_likelihood[k] >= m2.trace.log_likelihood[k - 1] - 1e-9);
    }
  }
}

TEST_CASE("translation table file round trip") {
  const auto corpus = make_corpus({{"das haus", "the house"}, {"das buch", "the book"}});
  const auto r = train_ibm1(corpus, 3, true);
  std::stringstream ss;
  r.table.write(ss);
  const auto back = TranslationTable::read(ss);
  for (const auto* f : {"NULL", "das", "haus", "buch"}) {
    for (const auto* e : {"the", "house", "book"}) {
      CHECK(back.prob(f, e) == doctest::Approx(r.table.prob(f, e)).epsilon(1e-9));
    }
  }
}

TEST_CASE("viterbi alignment picks the argmax source word") {
  const auto corpus = make_corpus({{"das haus", "the house"}, {"das buch", "the book"}});
  const auto fwd = train_ibm1(corpus, 20, false);
  const auto a = viterbi_align(corpus.pairs[0], fwd.table, Direction::kSourceToTarget);
  CHECK(a.to_pharaoh() == "0-0 1-1");
  const auto rev = train_ibm1(swap_sides(corpus), 20, false);
  const auto b = viterbi_align(corpus.pairs[1], rev.table, Direction::kTargetToSource);
  CHECK(b.to_pharaoh() == "0-0 1-1");
}

TEST_CASE("viterbi alignment leaves unknown words unlinked") {
  const auto corpus = make_corpus({{"das haus", "the house"}});
  const auto fwd = train_ibm1(corpus, 5, false);
  const SentencePair p{toks("das haus"), toks("the dog"), {}};
  const auto a = viterbi_align(p, fwd.table, Direction::kSourceToTarget);
  CHECK_FALSE(a.contains(0, 1));
  CHECK_FALSE(a.contains(1, 1));
}

TEST_CASE("symmetrization heuristics") {
  AlignmentMatrix f(3, 3);
  AlignmentMatrix r(3, 3);
  f.add(0, 0);
  f.add(1, 1);
  f.add(2, 1);
  r.add(0, 0);
  r.add(1, 1);
  r.add(2, 2);
  CHECK(symmetrize(f, r, Symmetrization::kIntersection).to_pharaoh() == "0-0 1-1");
  CHECK(symmetrize(f, r, Symmetrization::kUnion).to_pharaoh() == "0-0 1-1 2-1 2-2");
  CHECK(symmetrize(f, r, Symmetrization::kGrowDiagFinal).to_pharaoh() == "0-0 1-1 2-1 2-2");
  CHECK_THROWS_AS(symmetrize(f, AlignmentMatrix(2, 3), Symmetrization::kUnion), ValidationError);
}

TEST_CASE("grow-diag-final equals the textbook procedure on random alignments") {
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const auto m = 1 + rng.below(6);
    const auto n = 1 + rng.below(6);
    AlignmentMatrix f(m, n);
    AlignmentMatrix r(m, n);
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.below(5) != 0) f.add(rng.below(m), j);
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (rng.below(5) != 0) r.add(i, rng.below(n));
    }
    const auto got = symmetrize(f, r, Symmetrization::kGrowDiagFinal).links();
    const auto expected = textbook_gdf(f, r);
    CHECK(std::set<std::pair<std::size_t, std::size_t>>(got.begin(), got.end()) == expected);
  }
}

TEST_CASE("pharaoh format parsing") {
  const auto a = AlignmentMatrix::from_pharaoh("0-1 1-0", 2, 2);
  CHECK(a.contains(0, 1));
  CHECK(a.contains(1, 0));
  CHECK_THROWS_AS(AlignmentMatrix::from_pharaoh("0-5", 2, 2, 3), ParseError);
  CHECK_THROWS_AS(AlignmentMatrix::from_pharaoh("0:1", 2, 2, 3), ParseError);
}
