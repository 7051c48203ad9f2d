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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pbsmt/corpus.hpp"
#include "pbsmt/vocabulary.hpp"

namespace pbsmt {

// Lexical model t(word | given). "Given" is the conditioning side (source for
// a forward table, target for a reverse one). Given-id 0 is the NULL word.
//
// Rows are sparse over co-occurring words. Before training every lookup
// returns the uniform 1/|V_out|; afterwards missing entries are zero.
class TranslationTable {
 public:
  static constexpr std::string_view kNull = "NULL";
  static constexpr WordId kNullId = 0;

  TranslationTable();

  Vocabulary& given_vocab() { return given_; }
  Vocabulary& output_vocab() { return output_; }
  const Vocabulary& given_vocab() const { return given_; }
  const Vocabulary& output_vocab() const { return output_; }

  double prob(WordId given, WordId word) const;
  // String lookup; unknown words give 0 (or the uniform value when untrained).
  double prob(std::string_view given, std::string_view word) const;

  // Sum of t(.|given) over the whole output vocabulary.
  double row_sum(WordId given) const;

  struct Row {
    std::vector<WordId> words;  // sorted
    std::vector<double> probs;
  };
  const std::vector<Row>& rows() const { return rows_; }
  std::vector<Row>& mutable_rows() { return rows_; }

  // Index of `word` in rows()[given], or -1.
  std::ptrdiff_t slot(WordId given, WordId word) const;

  bool trained() const { return trained_; }
  void set_trained(bool trained) { trained_ = trained; }
  double fallback() const;

  // Lines `given<TAB>word<TAB>probability`, sorted, values floored at 1e-12.
  void write(std::ostream& out) const;
  static TranslationTable read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static TranslationTable load(const std::filesystem::path& path);

 private:
  Vocabulary given_;
  Vocabulary output_;
  std::vector<Row> rows_;
  bool trained_ = false;
};

inline constexpr double kProbabilityFloor = 1e-12;

struct EmTrace {
  // Corpus log-likelihood (natural log) of the parameters entering each
  // iteration, measured in that iteration's E-step.
  std::vector<double> log_likelihood;
};

struct Ibm1Result {
  TranslationTable table;
  EmTrace trace;
};

// IBM Model 1 EM over `corpus` (source conditions target). Throws
// ValidationError on an empty corpus.
Ibm1Result train_ibm1(const Corpus& corpus, std::size_t iterations, bool use_null = true);

// Swaps sides of every pair, for training reverse-direction models.
Corpus swap_sides(const Corpus& corpus);

// Positional model a(i | j, l, m) of IBM Model 2; i = 0 is NULL when enabled.
class DistortionTable {
 public:
  double prob(std::size_t i, std::size_t j, std::size_t l, std::size_t m) const;
  std::vector<double>& row(std::size_t j, std::size_t l, std::size_t m);
  const std::vector<double>* find(std::size_t j, std::size_t l, std::size_t m) const;
  bool use_null() const { return use_null_; }
  void set_use_null(bool v) { use_null_ = v; }

 private:
  static std::uint64_t key(std::size_t j, std::size_t l, std::size_t m);
  std::unordered_map<std::uint64_t, std::vector<double>> rows_;
  bool use_null_ = true;
};

struct Ibm2Result {
  TranslationTable table;
  DistortionTable distortion;
  EmTrace trace;
};

// IBM Model 2 EM initialized from a Model 1 table and uniform positions.
Ibm2Result train_ibm2(const Corpus& corpus, const TranslationTable& initial,
                      std::size_t iterations, bool use_null = true);

// Links (source index, target index) for one sentence pair.
class AlignmentMatrix {
 public:
  AlignmentMatrix() = default;
  AlignmentMatrix(std::size_t source_len, std::size_t target_len);

  std::size_t source_len() const { return source_len_; }
  std::size_t target_len() const { return target_len_; }

  // Throws ValidationError when out of bounds.
  void add(std::size_t i, std::size_t j);
  void remove(std::size_t i, std::size_t j);
  bool contains(std::size_t i, std::size_t j) const;
  bool empty() const { return link_count_ == 0; }
  std::size_t link_count() const { return link_count_; }

  // Sorted by (source, target).
  std::vector<std::pair<std::size_t, std::size_t>> links() const;

  // `i-j` pairs separated by spaces.
  std::string to_pharaoh() const;
  static AlignmentMatrix from_pharaoh(std::string_view line, std::size_t source_len,
                                      std::size_t target_len, std::size_t lineno = 0);

  bool operator==(const AlignmentMatrix& other) const = default;

 private:
  std::size_t source_len_ = 0;
  std::size_t target_len_ = 0;
  std::size_t link_count_ = 0;
  std::vector<std::uint8_t> grid_;
};

enum class Direction { kSourceToTarget, kTargetToSource };

// Every aligned word links to its argmax conditioning word. For
// kSourceToTarget `table` is t(target|source) and each target word is
// linked; for kTargetToSource `table` is t(source|target) and each source
// word is linked. Ties go to the lowest position; NULL wins only when
// strictly better, and NULL or zero-probability (OOV) choices emit no link.
AlignmentMatrix viterbi_align(const SentencePair& pair, const TranslationTable& table,
                              Direction direction, const DistortionTable* distortion = nullptr);

enum class Symmetrization { kIntersection, kUnion, kGrowDiagFinal };

Symmetrization parse_symmetrization(std::string_view name);
std::string_view to_string(Symmetrization heuristic);

// Throws ValidationError on a dimension mismatch.
AlignmentMatrix symmetrize(const AlignmentMatrix& forward, const AlignmentMatrix& reverse,
                           Symmetrization heuristic);

std::vector<AlignmentMatrix> read_pharaoh(const std::filesystem::path& path, const Corpus& corpus);
void write_pharaoh(const std::filesystem::path& path, const std::vector<AlignmentMatrix>& alignments);

}  // namespace pbsmt
