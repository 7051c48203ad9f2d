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

#include "pbsmt/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "pbsmt/error.hpp"

namespace pbsmt {
namespace {

double log10_or_missing(double p) {
  return p > 0.0 ? std::log10(p) : NGramModel::kMissingLogProb;
}

std::vector<WordId> pad_sentence(const Tokens& tokens, Vocabulary& vocab) {
  std::vector<WordId> ids;
  ids.reserve(tokens.size() + 2);
  ids.push_back(kBosId);
  for (const auto& t : tokens) ids.push_back(vocab.insert(t));
  ids.push_back(kEosId);
  return ids;
}

}  // namespace

NGram::NGram(std::span<const WordId> words) : size(static_cast<std::uint8_t>(words.size())) {
  std::copy(words.begin(), words.end(), ids.begin());
}

NGram NGram::extended(WordId w) const {
  NGram g = *this;
  g.ids[g.size++] = w;
  return g;
}

bool NGram::operator==(const NGram& other) const {
  return size == other.size && std::equal(ids.begin(), ids.begin() + size, other.ids.begin());
}

std::size_t NGramHash::operator()(const NGram& g) const {
  std::uint64_t h = 1469598103934665603ULL ^ g.size;
  for (std::size_t i = 0; i < g.size; ++i) {
    h ^= g.ids[i];
    h *= 1099511628211ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

Vocabulary make_lm_vocabulary() {
  Vocabulary v;
  v.insert(kUnkWord);
  v.insert(kBosWord);
  v.insert(kEosWord);
  return v;
}

std::uint64_t NGramCounts::count(std::span<const WordId> ngram) const {
  if (ngram.empty() || ngram.size() > order) return 0;
  const auto& m = counts[ngram.size() - 1];
  auto it = m.find(NGram(ngram));
  return it == m.end() ? 0 : it->second;
}

std::uint64_t NGramCounts::continuation_count(std::span<const WordId> ngram) const {
  if (ngram.empty() || ngram.size() >= order) return 0;
  const auto& m = continuation[ngram.size() - 1];
  auto it = m.find(NGram(ngram));
  return it == m.end() ? 0 : it->second;
}

NGramCounts count_ngrams(const std::vector<Tokens>& sentences, std::size_t order) {
  if (order < 1 || order > kMaxLmOrder) {
    throw ValidationError("LM order must be in [1, " + std::to_string(kMaxLmOrder) + "]");
  }
  NGramCounts c;
  c.order = order;
  c.counts.resize(order);
  c.continuation.resize(order > 1 ? order - 1 : 0);
  for (const auto& s : sentences) {
    const auto ids = pad_sentence(s, c.vocab);
    for (std::size_t start = 0; start < ids.size(); ++start) {
      for (std::size_t n = 1; n <= order && start + n <= ids.size(); ++n) {
        ++c.counts[n - 1][NGram(std::span<const WordId>(ids).subspan(start, n))];
      }
    }
  }
  for (std::size_t n = 2; n <= order; ++n) {
    for (const auto& [g, count] : c.counts[n - 1]) {
      ++c.continuation[n - 2][g.dropped_first()];
    }
  }
  return c;
}

NGramModel estimate_kn(const NGramCounts& counts, const DiscountOptions& discount) {
  const std::size_t order = counts.order;
  if (order == 0 || counts.counts.empty() || counts.counts[0].empty()) {
    throw ValidationError("cannot estimate a language model from empty counts");
  }

  // Kneser-Ney adjusted counts per order.
  std::vector<NGramMap<std::uint64_t>> adjusted(order);
  for (std::size_t n = 1; n <= order; ++n) {
    for (const auto& [g, raw] : counts.counts[n - 1]) {
      if (n == order || g.ids[0] == kBosId) {
        adjusted[n - 1][g] = raw;
      } else {
        auto it = counts.continuation[n - 1].find(g);
        if (it != counts.continuation[n - 1].end()) adjusted[n - 1][g] = it->second;
      }
    }
  }
  // <s> is never predicted.
  adjusted[0].erase(NGram(std::span<const WordId>(&kBosId, 1)));

  NGramModel model;
  model.order_ = order;
  model.vocab_ = counts.vocab;
  model.entries_.resize(order);
  model.discounts_.resize(order);

  for (std::size_t n = 1; n <= order; ++n) {
    double d = discount.fixed;
    if (discount.policy == DiscountOptions::Policy::kCountOfCounts) {
      std::uint64_t n1 = 0;
      std::uint64_t n2 = 0;
      for (const auto& [g, a] : adjusted[n - 1]) {
        if (a == 1) ++n1;
        if (a == 2) ++n2;
      }
      if (n1 > 0) d = static_cast<double>(n1) / static_cast<double>(n1 + 2 * n2);
    }
    if (!(d > 0.0 && d <= 1.0)) throw ValidationError("KN discount must be in (0, 1]");
    model.discounts_[n - 1] = d;
  }

  // Unigrams.
  {
    const double d = model.discounts_[0];
    double total = 0.0;
    double distinct = 0.0;
    for (const auto& [g, a] : adjusted[0]) {
      total += static_cast<double>(a);
      if (a > 0) distinct += 1.0;
    }
    const double vocab_size = static_cast<double>(model.vocab_.size() - 1);
    const double gamma = d * distinct / total;
    for (WordId w = 0; w < model.vocab_.size(); ++w) {
      const NGram g(std::span<const WordId>(&w, 1));
      if (w == kBosId) {
        model.entries_[0][g].log_prob = NGramModel::kMissingLogProb;
        continue;
      }
      auto it = adjusted[0].find(g);
      const double a = it == adjusted[0].end() ? 0.0 : static_cast<double>(it->second);
      const double p = std::max(a - d, 0.0) / total + gamma / vocab_size;
      model.entries_[0][g].log_prob = log10_or_missing(p);
    }
  }

  for (std::size_t n = 2; n <= order; ++n) {
    const double d = model.discounts_[n - 1];
    struct ContextStats {
      double total = 0.0;
      double distinct = 0.0;
    };
    NGramMap<ContextStats> contexts;
    for (const auto& [g, a] : adjusted[n - 1]) {
      auto& cs = contexts[g.prefix(n - 1)];
      cs.total += static_cast<double>(a);
      cs.distinct += 1.0;
    }
    for (const auto& [h, cs] : contexts) {
      auto& ctx_entry = model.entries_[n - 2][h];
      ctx_entry.has_backoff = true;
      ctx_entry.log_backoff = std::log10(d * cs.distinct / cs.total);
    }
    for (const auto& [g, a] : adjusted[n - 1]) {
      const auto& cs = contexts[g.prefix(n - 1)];
      const double gamma = d * cs.distinct / cs.total;
      const auto* lower = model.find(g.dropped_first().view());
      const double lower_p = lower == nullptr ? 0.0 : std::pow(10.0, lower->log_prob);
      const double p = std::max(static_cast<double>(a) - d, 0.0) / cs.total + gamma * lower_p;
      model.entries_[n - 1][g].log_prob = log10_or_missing(p);
    }
  }
  return model;
}

WordId NGramModel::id(std::string_view word) const {
  if (auto id = vocab_.find(word)) return *id;
  return kUnkId;
}

const NGramModel::Entry* NGramModel::find(std::span<const WordId> ngram) const {
  if (ngram.empty() || ngram.size() > order_) return nullptr;
  const auto& m = entries_[ngram.size() - 1];
  auto it = m.find(NGram(ngram));
  return it == m.end() ? nullptr : &it->second;
}

double NGramModel::conditional(std::span<const WordId> context, WordId word) const {
  if (context.size() > order_ - 1) context = context.last(order_ - 1);
  NGram g;
  double acc = 0.0;
  for (std::size_t k = context.size() + 1; k-- > 0;) {
    g = NGram(context.last(k)).extended(word);
    if (const auto* e = find(g.view())) return acc + e->log_prob;
    if (k > 0) {
      if (const auto* ctx = find(context.last(k)); ctx != nullptr && ctx->has_backoff) {
        acc += ctx->log_backoff;
      }
    }
  }
  return acc + kMissingLogProb;
}

NGramModel::State NGramModel::begin_state() const {
  if (order_ <= 1) return State();
  return State(std::span<const WordId>(&kBosId, 1));
}

double NGramModel::score(const State& state, WordId word, State& out) const {
  const double lp = conditional(state.view(), word);
  if (order_ <= 1) {
    out = State();
    return lp;
  }
  std::array<WordId, kMaxLmOrder + 1> buf{};
  std::size_t len = 0;
  for (WordId w : state.view()) buf[len++] = w;
  buf[len++] = word;
  const std::span<const WordId> all(buf.data(), len);
  for (std::size_t k = std::min(len, order_ - 1); k > 0; --k) {
    if (find(all.last(k)) != nullptr) {
      out = State(all.last(k));
      return lp;
    }
  }
  out = State();
  return lp;
}

double NGramModel::score_sentence(const Tokens& tokens) const {
  State state = begin_state();
  State next;
  double total = 0.0;
  for (const auto& t : tokens) {
    total += score(state, id(t), next);
    state = next;
  }
  total += score(state, kEosId, next);
  return total;
}

double NGramModel::total_probability(std::span<const WordId> context) const {
  double sum = 0.0;
  for (WordId w = 0; w < vocab_.size(); ++w) {
    if (w == kBosId) continue;
    sum += std::pow(10.0, conditional(context, w));
  }
  return sum;
}

std::vector<double> NGramModel::max_log_prob_by_word() const {
  std::vector<double> best(vocab_.size(), kMissingLogProb);
  for (const auto& level : entries_) {
    for (const auto& [g, e] : level) {
      const WordId w = g.back();
      if (w < best.size()) best[w] = std::max(best[w], e.log_prob);
    }
  }
  return best;
}

std::vector<NGram> NGramModel::contexts() const {
  std::vector<NGram> out;
  for (const auto& level : entries_) {
    for (const auto& [g, e] : level) {
      if (e.has_backoff) out.push_back(g);
    }
  }
  std::sort(out.begin(), out.end(), [](const NGram& a, const NGram& b) {
    return std::lexicographical_compare(a.ids.begin(), a.ids.begin() + a.size, b.ids.begin(),
                                        b.ids.begin() + b.size);
  });
  return out;
}

void NGramModel::write_arpa(std::ostream& out) const {
  out << "\\data\\\n";
  for (std::size_t n = 1; n <= order_; ++n) out << "ngram " << n << '=' << entries_[n - 1].size() << '\n';
  for (std::size_t n = 1; n <= order_; ++n) {
    out << "\n\\" << n << "-grams:\n";
    std::vector<std::pair<std::vector<std::string_view>, const Entry*>> rows;
    rows.reserve(entries_[n - 1].size());
    for (const auto& [g, e] : entries_[n - 1]) {
      std::vector<std::string_view> words;
      for (WordId w : g.view()) words.push_back(vocab_.word(w));
      rows.emplace_back(std::move(words), &e);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [words, e] : rows) {
      out << format_double(e->log_prob) << '\t';
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out << ' ';
        out << words[i];
      }
      if (e->has_backoff) out << '\t' << format_double(e->log_backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

NGramModel NGramModel::read_arpa(std::istream& in) {
  NGramModel model;
  std::string line;
  std::size_t lineno = 0;
  const auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  while (next_line() && trim(line) != "\\data\\") {
    if (!trim(line).empty()) throw ParseError("expected \\data\\ header", lineno);
  }
  if (trim(line) != "\\data\\") throw ParseError("missing \\data\\ header", lineno);

  std::vector<std::size_t> declared;
  while (next_line()) {
    const auto t = trim(line);
    if (t.empty()) {
      if (!declared.empty()) break;
      continue;
    }
    if (t.substr(0, 6) != "ngram ") throw ParseError("expected `ngram N=count`", lineno);
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected `ngram N=count`", lineno);
    const auto n = parse_int(t.substr(6, eq - 6), lineno);
    const auto c = parse_int(t.substr(eq + 1), lineno);
    if (n != static_cast<long long>(declared.size()) + 1 || c < 0) {
      throw ParseError("n-gram orders must be declared in sequence", lineno);
    }
    declared.push_back(static_cast<std::size_t>(c));
  }
  if (declared.empty()) throw ParseError("no n-gram counts declared", lineno);
  if (declared.size() > kMaxLmOrder) throw ParseError("order exceeds supported maximum", lineno);
  model.order_ = declared.size();
  model.entries_.resize(model.order_);

  for (std::size_t n = 1; n <= model.order_; ++n) {
    while (next_line() && trim(line).empty()) {
    }
    if (trim(line) != "\\" + std::to_string(n) + "-grams:") {
      throw ParseError("expected \\" + std::to_string(n) + "-grams: section", lineno);
    }
    std::size_t seen = 0;
    while (next_line()) {
      if (trim(line).empty()) break;
      const auto fields = split_whitespace(line);
      if (fields.size() != n + 1 && fields.size() != n + 2) {
        throw ParseError("malformed " + std::to_string(n) + "-gram entry", lineno);
      }
      Entry e;
      e.log_prob = parse_double(fields[0], lineno);
      if (fields.size() == n + 2) {
        e.has_backoff = true;
        e.log_backoff = parse_double(fields[n + 1], lineno);
      }
      NGram g;
      for (std::size_t k = 1; k <= n; ++k) {
        if (n == 1) {
          g = g.extended(model.vocab_.insert(fields[k]));
        } else {
          const auto id = model.vocab_.find(fields[k]);
          if (!id) throw ParseError("word '" + fields[k] + "' missing from unigrams", lineno);
          g = g.extended(*id);
        }
      }
      if (!model.entries_[n - 1].emplace(g, e).second) {
        throw ParseError("duplicate n-gram", lineno);
      }
      ++seen;
    }
    if (seen != declared[n - 1]) {
      throw ParseError("header declares " + std::to_string(declared[n - 1]) + " " +
                           std::to_string(n) + "-grams, section has " + std::to_string(seen),
                       lineno);
    }
  }
  while (next_line() && trim(line).empty()) {
  }
  if (trim(line) != "\\end\\") throw ParseError("missing \\end\\ marker", lineno);
  return model;
}

void NGramModel::save_arpa(const std::filesystem::path& path) const {
  std::ofstream out = open_output(path);
  write_arpa(out);
}

NGramModel NGramModel::load_arpa(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_arpa(in);
}

double perplexity(const NGramModel& model, const std::vector<Tokens>& sentences) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& s : sentences) {
    total += model.score_sentence(s);
    tokens += s.size() + 1;
  }
  if (tokens == 0) return 1.0;
  return std::pow(10.0, -total / static_cast<double>(tokens));
}

}  // namespace pbsmt
