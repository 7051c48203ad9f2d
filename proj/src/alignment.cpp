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

#include "pbsmt/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include "pbsmt/error.hpp"

namespace pbsmt {
namespace {

struct EncodedPair {
  std::vector<WordId> given;  // NULL first when enabled
  std::vector<WordId> output;
};

std::vector<EncodedPair> encode_corpus(const Corpus& corpus, TranslationTable& table, bool use_null) {
  std::vector<EncodedPair> encoded;
  encoded.reserve(corpus.size());
  for (const auto& p : corpus.pairs) {
    EncodedPair e;
    if (use_null) e.given.push_back(TranslationTable::kNullId);
    for (const auto& w : p.source) e.given.push_back(table.given_vocab().insert(w));
    for (const auto& w : p.target) e.output.push_back(table.output_vocab().insert(w));
    encoded.push_back(std::move(e));
  }
  return encoded;
}

// Sparse rows over co-occurring words, every entry set to 1/|V_out|.
void init_uniform_rows(TranslationTable& table, const std::vector<EncodedPair>& encoded) {
  std::vector<std::vector<WordId>> cooc(table.given_vocab().size());
  for (const auto& e : encoded) {
    if (e.output.empty()) continue;
    for (WordId g : e.given) cooc[g].insert(cooc[g].end(), e.output.begin(), e.output.end());
  }
  const double uniform =
      table.output_vocab().size() == 0 ? 0.0 : 1.0 / static_cast<double>(table.output_vocab().size());
  auto& rows = table.mutable_rows();
  rows.assign(cooc.size(), {});
  for (std::size_t g = 0; g < cooc.size(); ++g) {
    auto& words = cooc[g];
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    rows[g].words = std::move(words);
    rows[g].probs.assign(rows[g].words.size(), uniform);
  }
}

// Slot of every (given position, output position) cell of a sentence pair.
std::vector<std::size_t> sentence_slots(const TranslationTable& table, const EncodedPair& e) {
  std::vector<std::size_t> slots(e.given.size() * e.output.size());
  for (std::size_t j = 0; j < e.output.size(); ++j) {
    for (std::size_t i = 0; i < e.given.size(); ++i) {
      slots[j * e.given.size() + i] = static_cast<std::size_t>(table.slot(e.given[i], e.output[j]));
    }
  }
  return slots;
}

void normalize_rows(TranslationTable& table, const std::vector<std::vector<double>>& counts) {
  auto& rows = table.mutable_rows();
  for (std::size_t g = 0; g < rows.size(); ++g) {
    double total = 0.0;
    for (double c : counts[g]) total += c;
    if (total <= 0.0) continue;
    for (std::size_t k = 0; k < counts[g].size(); ++k) rows[g].probs[k] = counts[g][k] / total;
  }
  table.set_trained(true);
}

std::vector<std::vector<double>> zero_counts(const TranslationTable& table) {
  std::vector<std::vector<double>> counts(table.rows().size());
  for (std::size_t g = 0; g < counts.size(); ++g) counts[g].assign(table.rows()[g].words.size(), 0.0);
  return counts;
}

WordId lookup_or_sentinel(const Vocabulary& vocab, std::string_view word) {
  if (auto id = vocab.find(word)) return *id;
  return static_cast<WordId>(-1);
}

}  // namespace

TranslationTable::TranslationTable() { given_.insert(kNull); }

double TranslationTable::fallback() const {
  if (trained_ || output_.size() == 0) return 0.0;
  return 1.0 / static_cast<double>(output_.size());
}

std::ptrdiff_t TranslationTable::slot(WordId given, WordId word) const {
  if (given >= rows_.size()) return -1;
  const auto& words = rows_[given].words;
  auto it = std::lower_bound(words.begin(), words.end(), word);
  if (it == words.end() || *it != word) return -1;
  return it - words.begin();
}

double TranslationTable::prob(WordId given, WordId word) const {
  const auto s = slot(given, word);
  if (s < 0) {
    // Unknown output words have no mass even before training.
    if (word >= output_.size()) return 0.0;
    return fallback();
  }
  return rows_[given].probs[static_cast<std::size_t>(s)];
}

double TranslationTable::prob(std::string_view given, std::string_view word) const {
  const auto w = output_.find(word);
  if (!w) return 0.0;
  const auto g = given_.find(given);
  if (!g) return fallback();
  return prob(*g, *w);
}

double TranslationTable::row_sum(WordId given) const {
  double sum = 0.0;
  std::size_t stored = 0;
  if (given < rows_.size()) {
    for (double p : rows_[given].probs) sum += p;
    stored = rows_[given].probs.size();
  }
  return sum + static_cast<double>(output_.size() - stored) * fallback();
}

void TranslationTable::write(std::ostream& out) const {
  std::vector<std::tuple<std::string, std::string, double>> lines;
  for (std::size_t g = 0; g < rows_.size(); ++g) {
    for (std::size_t k = 0; k < rows_[g].words.size(); ++k) {
      lines.emplace_back(given_.word(static_cast<WordId>(g)), output_.word(rows_[g].words[k]),
                         std::max(rows_[g].probs[k], kProbabilityFloor));
    }
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [g, w, p] : lines) out << g << '\t' << w << '\t' << format_double(p) << '\n';
}

TranslationTable TranslationTable::read(std::istream& in) {
  TranslationTable table;
  std::vector<std::tuple<WordId, WordId, double>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_on(line, "\t");
    if (fields.size() != 3) throw ParseError("expected given<TAB>word<TAB>probability", lineno);
    const double p = parse_double(fields[2], lineno);
    if (!(p >= 0.0 && p <= 1.0)) throw ParseError("probability outside [0,1]", lineno);
    entries.emplace_back(table.given_.insert(fields[0]), table.output_.insert(fields[1]), p);
  }
  table.rows_.assign(table.given_.size(), {});
  std::sort(entries.begin(), entries.end());
  for (const auto& [g, w, p] : entries) {
    table.rows_[g].words.push_back(w);
    table.rows_[g].probs.push_back(p);
  }
  table.trained_ = true;
  return table;
}

void TranslationTable::save(const std::filesystem::path& path) const {
  std::ofstream out = open_output(path);
  write(out);
}

TranslationTable TranslationTable::load(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read(in);
}

Corpus swap_sides(const Corpus& corpus) {
  Corpus out;
  out.source_lang = corpus.target_lang;
  out.target_lang = corpus.source_lang;
  out.pairs.reserve(corpus.size());
  for (const auto& p : corpus.pairs) out.pairs.push_back({p.target, p.source, p.similarity});
  return out;
}

Ibm1Result train_ibm1(const Corpus& corpus, std::size_t iterations, bool use_null) {
  if (corpus.empty()) throw ValidationError("cannot train IBM Model 1 on an empty corpus");
  Ibm1Result result;
  TranslationTable& table = result.table;
  const auto encoded = encode_corpus(corpus, table, use_null);
  init_uniform_rows(table, encoded);

  for (std::size_t it = 0; it < iterations; ++it) {
    auto counts = zero_counts(table);
    double log_likelihood = 0.0;
    std::vector<double> probs;
    for (const auto& e : encoded) {
      if (e.given.empty() || e.output.empty()) continue;
      const auto slots = sentence_slots(table, e);
      const std::size_t len = e.given.size();
      probs.resize(len);
      for (std::size_t j = 0; j < e.output.size(); ++j) {
        double denom = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
          probs[i] = table.rows()[e.given[i]].probs[slots[j * len + i]];
          denom += probs[i];
        }
        if (denom <= 0.0) continue;
        log_likelihood += std::log(denom / static_cast<double>(len));
        for (std::size_t i = 0; i < len; ++i) counts[e.given[i]][slots[j * len + i]] += probs[i] / denom;
      }
    }
    normalize_rows(table, counts);
    result.trace.log_likelihood.push_back(log_likelihood);
  }
  return result;
}

std::uint64_t DistortionTable::key(std::size_t j, std::size_t l, std::size_t m) {
  return (static_cast<std::uint64_t>(j) << 42) | (static_cast<std::uint64_t>(l) << 21) |
         static_cast<std::uint64_t>(m);
}

std::vector<double>& DistortionTable::row(std::size_t j, std::size_t l, std::size_t m) {
  return rows_[key(j, l, m)];
}

const std::vector<double>* DistortionTable::find(std::size_t j, std::size_t l, std::size_t m) const {
  auto it = rows_.find(key(j, l, m));
  return it == rows_.end() ? nullptr : &it->second;
}

double DistortionTable::prob(std::size_t i, std::size_t j, std::size_t l, std::size_t m) const {
  const std::size_t positions = l + (use_null_ ? 1 : 0);
  if (const auto* r = find(j, l, m); r != nullptr && i < r->size()) return (*r)[i];
  return positions == 0 ? 0.0 : 1.0 / static_cast<double>(positions);
}

Ibm2Result train_ibm2(const Corpus& corpus, const TranslationTable& initial,
                      std::size_t iterations, bool use_null) {
  if (corpus.empty()) throw ValidationError("cannot train IBM Model 2 on an empty corpus");
  Ibm2Result result;
  result.table = initial;
  result.distortion.set_use_null(use_null);
  TranslationTable& table = result.table;
  // Words unseen by the initial table get fresh ids; their rows start uniform.
  const auto encoded = encode_corpus(corpus, table, use_null);
  {
    TranslationTable fresh;
    fresh.given_vocab() = table.given_vocab();
    fresh.output_vocab() = table.output_vocab();
    init_uniform_rows(fresh, encoded);
    auto& rows = table.mutable_rows();
    rows.resize(fresh.rows().size());
    for (std::size_t g = 0; g < rows.size(); ++g) {
      auto& row = rows[g];
      const auto& want = fresh.rows()[g];
      TranslationTable::Row merged;
      merged.words = want.words;
      merged.probs.resize(want.words.size());
      for (std::size_t k = 0; k < want.words.size(); ++k) {
        auto it = std::lower_bound(row.words.begin(), row.words.end(), want.words[k]);
        const bool found = it != row.words.end() && *it == want.words[k];
        merged.probs[k] = found ? row.probs[static_cast<std::size_t>(it - row.words.begin())]
                                : want.probs[k];
      }
      row = std::move(merged);
    }
  }
  const std::size_t offset = use_null ? 1 : 0;

  for (std::size_t it = 0; it < iterations; ++it) {
    auto counts = zero_counts(table);
    std::map<std::uint64_t, std::vector<double>> align_counts;
    double log_likelihood = 0.0;
    std::vector<double> post;
    for (const auto& e : encoded) {
      if (e.given.empty() || e.output.empty()) continue;
      const auto slots = sentence_slots(table, e);
      const std::size_t len = e.given.size();
      const std::size_t l = len - offset;
      const std::size_t m = e.output.size();
      post.resize(len);
      for (std::size_t j = 0; j < m; ++j) {
        double denom = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
          post[i] = table.rows()[e.given[i]].probs[slots[j * len + i]] *
                    result.distortion.prob(i, j, l, m);
          denom += post[i];
        }
        if (denom <= 0.0) continue;
        log_likelihood += std::log(denom);
        auto& ac = align_counts[(static_cast<std::uint64_t>(j) << 42) |
                                (static_cast<std::uint64_t>(l) << 21) | m];
        ac.resize(len, 0.0);
        for (std::size_t i = 0; i < len; ++i) {
          const double p = post[i] / denom;
          counts[e.given[i]][slots[j * len + i]] += p;
          ac[i] += p;
        }
      }
    }
    normalize_rows(table, counts);
    for (const auto& [k, ac] : align_counts) {
      double total = 0.0;
      for (double c : ac) total += c;
      const std::size_t j = k >> 42;
      const std::size_t l = (k >> 21) & ((1u << 21) - 1);
      const std::size_t m = k & ((1u << 21) - 1);
      auto& row = result.distortion.row(j, l, m);
      row.resize(ac.size());
      for (std::size_t i = 0; i < ac.size(); ++i) row[i] = total > 0 ? ac[i] / total : 0.0;
    }
    result.trace.log_likelihood.push_back(log_likelihood);
  }
  return result;
}

AlignmentMatrix::AlignmentMatrix(std::size_t source_len, std::size_t target_len)
    : source_len_(source_len), target_len_(target_len), grid_(source_len * target_len, 0) {}

void AlignmentMatrix::add(std::size_t i, std::size_t j) {
  if (i >= source_len_ || j >= target_len_) {
    throw ValidationError("alignment link " + std::to_string(i) + "-" + std::to_string(j) +
                          " outside " + std::to_string(source_len_) + "x" +
                          std::to_string(target_len_));
  }
  auto& cell = grid_[i * target_len_ + j];
  if (!cell) {
    cell = 1;
    ++link_count_;
  }
}

void AlignmentMatrix::remove(std::size_t i, std::size_t j) {
  if (i >= source_len_ || j >= target_len_) return;
  auto& cell = grid_[i * target_len_ + j];
  if (cell) {
    cell = 0;
    --link_count_;
  }
}

bool AlignmentMatrix::contains(std::size_t i, std::size_t j) const {
  return i < source_len_ && j < target_len_ && grid_[i * target_len_ + j] != 0;
}

std::vector<std::pair<std::size_t, std::size_t>> AlignmentMatrix::links() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(link_count_);
  for (std::size_t i = 0; i < source_len_; ++i) {
    for (std::size_t j = 0; j < target_len_; ++j) {
      if (grid_[i * target_len_ + j]) out.emplace_back(i, j);
    }
  }
  return out;
}

std::string AlignmentMatrix::to_pharaoh() const {
  std::string out;
  for (const auto& [i, j] : links()) {
    if (!out.empty()) out += ' ';
    out += std::to_string(i) + '-' + std::to_string(j);
  }
  return out;
}

AlignmentMatrix AlignmentMatrix::from_pharaoh(std::string_view line, std::size_t source_len,
                                              std::size_t target_len, std::size_t lineno) {
  AlignmentMatrix a(source_len, target_len);
  for (const auto& field : split_whitespace(line)) {
    const auto dash = field.find('-');
    if (dash == std::string::npos) throw ParseError("malformed link '" + field + "'", lineno);
    const auto i = parse_int(std::string_view(field).substr(0, dash), lineno);
    const auto j = parse_int(std::string_view(field).substr(dash + 1), lineno);
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= source_len ||
        static_cast<std::size_t>(j) >= target_len) {
      throw ParseError("link '" + field + "' outside sentence dimensions", lineno);
    }
    a.add(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return a;
}

AlignmentMatrix viterbi_align(const SentencePair& pair, const TranslationTable& table,
                              Direction direction, const DistortionTable* distortion) {
  const bool forward = direction == Direction::kSourceToTarget;
  const Tokens& given = forward ? pair.source : pair.target;
  const Tokens& output = forward ? pair.target : pair.source;
  AlignmentMatrix result(pair.source.size(), pair.target.size());
  const std::size_t l = given.size();
  const std::size_t m = output.size();
  const std::size_t offset = distortion != nullptr && distortion->use_null() ? 1 : 0;

  std::vector<WordId> given_ids(l);
  for (std::size_t i = 0; i < l; ++i) given_ids[i] = lookup_or_sentinel(table.given_vocab(), given[i]);
  const double fallback = table.fallback();

  for (std::size_t j = 0; j < m; ++j) {
    const auto word = table.output_vocab().find(output[j]);
    if (!word) continue;
    const auto score = [&](std::size_t i, WordId g) {
      double p = g == static_cast<WordId>(-1) ? fallback : table.prob(g, *word);
      if (distortion != nullptr) p *= distortion->prob(i, j, l, m);
      return p;
    };
    double best = 0.0;
    std::size_t best_i = l;
    for (std::size_t i = 0; i < l; ++i) {
      const double p = score(i + offset, given_ids[i]);
      if (p > best) {
        best = p;
        best_i = i;
      }
    }
    const double null_p = score(0, TranslationTable::kNullId);
    if (best_i == l || null_p > best) continue;
    if (forward) {
      result.add(best_i, j);
    } else {
      result.add(j, best_i);
    }
  }
  return result;
}

Symmetrization parse_symmetrization(std::string_view name) {
  if (name == "intersection") return Symmetrization::kIntersection;
  if (name == "union") return Symmetrization::kUnion;
  if (name == "grow-diag-final") return Symmetrization::kGrowDiagFinal;
  throw ValidationError("unknown symmetrization heuristic '" + std::string(name) + "'");
}

std::string_view to_string(Symmetrization heuristic) {
  switch (heuristic) {
    case Symmetrization::kIntersection: return "intersection";
    case Symmetrization::kUnion: return "union";
    default: return "grow-diag-final";
  }
}

AlignmentMatrix symmetrize(const AlignmentMatrix& forward, const AlignmentMatrix& reverse,
                           Symmetrization heuristic) {
  if (forward.source_len() != reverse.source_len() || forward.target_len() != reverse.target_len()) {
    throw ValidationError("cannot symmetrize alignments of different dimensions");
  }
  const std::size_t m = forward.source_len();
  const std::size_t n = forward.target_len();
  AlignmentMatrix result(m, n);
  AlignmentMatrix either(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool f = forward.contains(i, j);
      const bool r = reverse.contains(i, j);
      if (f && r) result.add(i, j);
      if (f || r) either.add(i, j);
    }
  }
  if (heuristic == Symmetrization::kIntersection) return result;
  if (heuristic == Symmetrization::kUnion) return either;

  std::vector<bool> src_aligned(m, false);
  std::vector<bool> tgt_aligned(n, false);
  for (const auto& [i, j] : result.links()) {
    src_aligned[i] = true;
    tgt_aligned[j] = true;
  }
  const auto add = [&](std::size_t i, std::size_t j) {
    result.add(i, j);
    src_aligned[i] = true;
    tgt_aligned[j] = true;
  };

  // Neighborhood as (target delta, source delta): horizontal/vertical first,
  // then diagonals.
  static constexpr int kNeighbors[8][2] = {{-1, 0}, {0, -1}, {1, 0},  {0, 1},
                                           {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  bool added = true;
  while (added) {
    added = false;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (!result.contains(i, j)) continue;
        for (const auto& d : kNeighbors) {
          const auto jj = static_cast<std::ptrdiff_t>(j) + d[0];
          const auto ii = static_cast<std::ptrdiff_t>(i) + d[1];
          if (jj < 0 || ii < 0 || jj >= static_cast<std::ptrdiff_t>(n) ||
              ii >= static_cast<std::ptrdiff_t>(m)) {
            continue;
          }
          const auto si = static_cast<std::size_t>(ii);
          const auto tj = static_cast<std::size_t>(jj);
          if ((!src_aligned[si] || !tgt_aligned[tj]) && either.contains(si, tj)) {
            add(si, tj);
            added = true;
          }
        }
      }
    }
  }
  for (const AlignmentMatrix* a : {&forward, &reverse}) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if ((!src_aligned[i] || !tgt_aligned[j]) && a->contains(i, j)) add(i, j);
      }
    }
  }
  return result;
}

std::vector<AlignmentMatrix> read_pharaoh(const std::filesystem::path& path, const Corpus& corpus) {
  const auto lines = read_lines(path);
  if (lines.size() != corpus.size()) {
    throw SizeError("alignment file has " + std::to_string(lines.size()) + " lines, corpus has " +
                    std::to_string(corpus.size()) + " pairs");
  }
  std::vector<AlignmentMatrix> out;
  out.reserve(lines.size());
  for (std::size_t k = 0; k < lines.size(); ++k) {
    out.push_back(AlignmentMatrix::from_pharaoh(lines[k], corpus.pairs[k].source.size(),
                                                corpus.pairs[k].target.size(), k + 1));
  }
  return out;
}

void write_pharaoh(const std::filesystem::path& path, const std::vector<AlignmentMatrix>& alignments) {
  std::vector<std::string> lines;
  lines.reserve(alignments.size());
  for (const auto& a : alignments) lines.push_back(a.to_pharaoh());
  write_lines(path, lines);
}

}  // namespace pbsmt
