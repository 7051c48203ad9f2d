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

#include "pbsmt/phrase_table.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "pbsmt/error.hpp"

namespace pbsmt {

std::vector<PhraseSpan> extract_spans(const AlignmentMatrix& alignment, std::size_t max_len) {
  const auto m = static_cast<std::ptrdiff_t>(alignment.source_len());
  const auto n = static_cast<std::ptrdiff_t>(alignment.target_len());
  const auto limit = static_cast<std::ptrdiff_t>(max_len);
  std::vector<PhraseSpan> spans;
  if (alignment.empty() || limit == 0) return spans;

  std::vector<bool> src_aligned(static_cast<std::size_t>(m), false);
  std::vector<std::vector<std::ptrdiff_t>> by_target(static_cast<std::size_t>(n));
  std::vector<std::vector<std::ptrdiff_t>> by_source(static_cast<std::size_t>(m));
  for (const auto& [i, j] : alignment.links()) {
    src_aligned[i] = true;
    by_target[j].push_back(static_cast<std::ptrdiff_t>(i));
    by_source[i].push_back(static_cast<std::ptrdiff_t>(j));
  }

  for (std::ptrdiff_t tb = 0; tb < n; ++tb) {
    for (std::ptrdiff_t te = tb; te < n && te - tb + 1 <= limit; ++te) {
      std::ptrdiff_t fmin = m;
      std::ptrdiff_t fmax = -1;
      for (std::ptrdiff_t j = tb; j <= te; ++j) {
        for (auto i : by_target[static_cast<std::size_t>(j)]) {
          fmin = std::min(fmin, i);
          fmax = std::max(fmax, i);
        }
      }
      if (fmax < 0 || fmax - fmin + 1 > limit) continue;

      bool consistent = true;
      for (std::ptrdiff_t i = fmin; i <= fmax && consistent; ++i) {
        for (auto j : by_source[static_cast<std::size_t>(i)]) {
          if (j < tb || j > te) {
            consistent = false;
            break;
          }
        }
      }
      if (!consistent) continue;

      for (std::ptrdiff_t fs = fmin;; --fs) {
        for (std::ptrdiff_t fe = fmax;; ++fe) {
          if (fe - fs + 1 > limit) break;
          spans.push_back({static_cast<std::size_t>(fs), static_cast<std::size_t>(fe + 1),
                           static_cast<std::size_t>(tb), static_cast<std::size_t>(te + 1)});
          if (fe + 1 >= m || src_aligned[static_cast<std::size_t>(fe + 1)]) break;
        }
        if (fs - 1 < 0 || src_aligned[static_cast<std::size_t>(fs - 1)] || fmax - (fs - 1) + 1 > limit) {
          break;
        }
      }
    }
  }
  return spans;
}

std::vector<PhrasePair> extract_phrases(const SentencePair& pair, const AlignmentMatrix& alignment,
                                        std::size_t max_len) {
  if (alignment.source_len() != pair.source.size() || alignment.target_len() != pair.target.size()) {
    throw ValidationError("alignment dimensions do not match the sentence pair");
  }
  std::vector<PhrasePair> out;
  for (const auto& span : extract_spans(alignment, max_len)) {
    PhrasePair p;
    p.source.assign(pair.source.begin() + static_cast<std::ptrdiff_t>(span.source_begin),
                    pair.source.begin() + static_cast<std::ptrdiff_t>(span.source_end));
    p.target.assign(pair.target.begin() + static_cast<std::ptrdiff_t>(span.target_begin),
                    pair.target.begin() + static_cast<std::ptrdiff_t>(span.target_end));
    for (std::size_t i = span.source_begin; i < span.source_end; ++i) {
      for (std::size_t j = span.target_begin; j < span.target_end; ++j) {
        if (alignment.contains(i, j)) {
          p.alignment.emplace_back(static_cast<std::uint8_t>(i - span.source_begin),
                                   static_cast<std::uint8_t>(j - span.target_begin));
        }
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string PhraseTable::key(std::span<const std::string> source) {
  std::string k;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (i) k += ' ';
    k += source[i];
  }
  return k;
}

void PhraseTable::add(const Tokens& source, Tokens target, const PhraseScores& scores) {
  if (source.empty() || target.empty()) throw ValidationError("phrase pairs must be non-empty");
  entries_[key(source)].push_back({std::move(target), scores});
  ++size_;
  max_source_length_ = std::max(max_source_length_, source.size());
}

const std::vector<PhraseOption>* PhraseTable::find(std::span<const std::string> source) const {
  auto it = entries_.find(key(source));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::pair<Tokens, PhraseOption>> PhraseTable::sorted_entries() const {
  std::vector<std::pair<Tokens, PhraseOption>> out;
  out.reserve(size_);
  for (const auto& [k, options] : entries_) {
    const Tokens src = split_whitespace(k);
    for (const auto& o : options) out.emplace_back(src, o);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second.target < b.second.target;
  });
  return out;
}

void PhraseTable::write(std::ostream& out) const {
  for (const auto& [src, o] : sorted_entries()) {
    out << join(src) << " ||| " << join(o.target) << " ||| "
        << format_double(o.scores.target_given_source) << ' '
        << format_double(o.scores.lex_target_given_source) << ' '
        << format_double(o.scores.source_given_target) << ' '
        << format_double(o.scores.lex_source_given_target) << '\n';
  }
}

PhraseTable PhraseTable::read(std::istream& in) {
  PhraseTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_on(line, "|||");
    if (fields.size() != 3) throw ParseError("expected `src ||| tgt ||| scores`", lineno);
    const Tokens src = split_whitespace(fields[0]);
    Tokens tgt = split_whitespace(fields[1]);
    const Tokens values = split_whitespace(fields[2]);
    if (src.empty() || tgt.empty()) throw ParseError("empty phrase", lineno);
    if (values.size() != 4) throw ParseError("expected 4 feature values", lineno);
    double v[4];
    for (std::size_t k = 0; k < 4; ++k) {
      v[k] = parse_double(values[k], lineno);
      if (!(v[k] > 0.0 && v[k] <= 1.0)) throw ParseError("feature value outside (0,1]", lineno);
    }
    table.add(src, std::move(tgt), {v[0], v[1], v[2], v[3]});
  }
  return table;
}

void PhraseTable::save(const std::filesystem::path& path) const {
  std::ofstream out = open_output(path);
  write(out);
}

PhraseTable PhraseTable::load(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read(in);
}

double lexical_weight(const Tokens& source, const Tokens& target, const LocalAlignment& alignment,
                      const TranslationTable& target_given_source) {
  double weight = 1.0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    double sum = 0.0;
    std::size_t links = 0;
    for (const auto& [i, jj] : alignment) {
      if (jj != j) continue;
      sum += std::max(target_given_source.prob(source[i], target[j]), kProbabilityFloor);
      ++links;
    }
    if (links == 0) {
      weight *= std::max(target_given_source.prob(TranslationTable::kNull, target[j]), kProbabilityFloor);
    } else {
      weight *= sum / static_cast<double>(links);
    }
  }
  return std::max(weight, kProbabilityFloor);
}

PhraseTable score_phrase_table(std::span<const PhrasePair> extractions,
                               const TranslationTable& forward, const TranslationTable& reverse) {
  struct Aggregate {
    const PhrasePair* first = nullptr;
    std::size_t count = 0;
    // Distinct internal alignments with counts, in first-seen order.
    std::vector<std::pair<LocalAlignment, std::size_t>> alignments;
  };
  std::map<std::pair<std::string, std::string>, Aggregate> pairs;
  std::map<std::string, std::size_t> source_totals;
  std::map<std::string, std::size_t> target_totals;

  for (const auto& p : extractions) {
    const std::string src = join(p.source);
    const std::string tgt = join(p.target);
    auto& agg = pairs[{src, tgt}];
    if (agg.first == nullptr) agg.first = &p;
    agg.count += p.count;
    auto it = std::find_if(agg.alignments.begin(), agg.alignments.end(),
                           [&](const auto& a) { return a.first == p.alignment; });
    if (it == agg.alignments.end()) {
      agg.alignments.emplace_back(p.alignment, p.count);
    } else {
      it->second += p.count;
    }
    source_totals[src] += p.count;
    target_totals[tgt] += p.count;
  }

  PhraseTable table;
  for (const auto& [key, agg] : pairs) {
    const LocalAlignment* best = &agg.alignments.front().first;
    std::size_t best_count = agg.alignments.front().second;
    for (const auto& [a, c] : agg.alignments) {
      if (c > best_count) {
        best = &a;
        best_count = c;
      }
    }
    LocalAlignment transposed;
    for (const auto& [i, j] : *best) transposed.emplace_back(j, i);
    std::sort(transposed.begin(), transposed.end());

    const PhrasePair& p = *agg.first;
    PhraseScores s;
    s.target_given_source =
        static_cast<double>(agg.count) / static_cast<double>(source_totals[key.first]);
    s.source_given_target =
        static_cast<double>(agg.count) / static_cast<double>(target_totals[key.second]);
    s.lex_target_given_source = lexical_weight(p.source, p.target, *best, forward);
    s.lex_source_given_target = lexical_weight(p.target, p.source, transposed, reverse);
    table.add(p.source, p.target, s);
  }
  return table;
}

}  // namespace pbsmt
