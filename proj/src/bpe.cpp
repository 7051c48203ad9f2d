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

#include "pbsmt/bpe.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "pbsmt/error.hpp"
#include "pbsmt/utf8.hpp"

namespace pbsmt {
namespace {

using SymbolPair = std::pair<std::string, std::string>;

std::vector<std::string> initial_symbols(std::string_view word) {
  auto symbols = utf8::split_code_points(word);
  if (!symbols.empty()) symbols.back() += BpeModel::kEndOfWord;
  return symbols;
}

// Incremental pair statistics. `order` holds (-count, pair) so that
// begin() is the most frequent pair, lexicographically smallest on ties.
class PairStats {
 public:
  void add(const SymbolPair& p, long long delta, std::size_t word) {
    auto [it, inserted] = counts_.try_emplace(p, 0);
    if (!inserted) order_.erase({-it->second, p});
    it->second += delta;
    if (it->second > 0) {
      order_.insert({-it->second, p});
    }
    if (delta > 0) where_[p].insert(word);
  }

  bool empty() const { return order_.empty(); }
  long long best_count() const { return -order_.begin()->first; }
  const SymbolPair& best() const { return order_.begin()->second; }
  const std::set<std::size_t>& words_with(const SymbolPair& p) { return where_[p]; }

 private:
  std::map<SymbolPair, long long> counts_;
  std::set<std::pair<long long, SymbolPair>> order_;
  std::map<SymbolPair, std::set<std::size_t>> where_;
};

std::vector<std::string> merge_pair(const std::vector<std::string>& symbols, const SymbolPair& p) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == p.first && symbols[i + 1] == p.second) {
      out.push_back(p.first + p.second);
      ++i;
    } else {
      out.push_back(symbols[i]);
    }
  }
  return out;
}

}  // namespace

BpeModel::BpeModel(std::vector<BpeMerge> merges) : merges_(std::move(merges)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    ranks_.try_emplace({merges_[i].left, merges_[i].right}, i);
  }
}

std::set<std::string> BpeModel::vocabulary() const {
  std::set<std::string> vocab;
  for (const auto& m : merges_) {
    vocab.insert(m.left);
    vocab.insert(m.right);
    vocab.insert(m.merged());
  }
  return vocab;
}

std::vector<std::string> BpeModel::segment(std::string_view word) const {
  auto symbols = initial_symbols(word);
  while (symbols.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    const SymbolPair* best = nullptr;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = ranks_.find({symbols[i], symbols[i + 1]});
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
        best = &it->first;
      }
    }
    if (best == nullptr) break;
    symbols = merge_pair(symbols, *best);
  }
  return symbols;
}

Tokens BpeModel::encode(const Tokens& words) const {
  Tokens out;
  for (const auto& w : words) {
    auto pieces = segment(w);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (i + 1 < pieces.size()) {
        out.push_back(pieces[i] + std::string(kContinuation));
      } else {
        std::string last = pieces[i];
        last.resize(last.size() - kEndOfWord.size());
        out.push_back(std::move(last));
      }
    }
  }
  return out;
}

Tokens BpeModel::decode(const Tokens& pieces) {
  Tokens out;
  std::string current;
  for (const auto& p : pieces) {
    if (p.size() >= kContinuation.size() &&
        std::string_view(p).substr(p.size() - kContinuation.size()) == kContinuation) {
      current.append(p, 0, p.size() - kContinuation.size());
    } else {
      current += p;
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

void BpeModel::write(std::ostream& out) const {
  out << merges_.size() << '\n';
  for (const auto& m : merges_) out << m.left << ' ' << m.right << '\n';
}

BpeModel BpeModel::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing BPE header line", 1);
  const auto count = parse_int(line, 1);
  if (count < 0) throw ParseError("negative merge count", 1);
  std::vector<BpeMerge> merges;
  merges.reserve(static_cast<std::size_t>(count));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != 2) throw ParseError("expected `left right`", lineno);
    merges.push_back({fields[0], fields[1]});
  }
  if (merges.size() != static_cast<std::size_t>(count)) {
    throw ParseError("header declares " + std::to_string(count) + " merges, file has " +
                         std::to_string(merges.size()),
                     1);
  }
  return BpeModel(std::move(merges));
}

void BpeModel::save(const std::filesystem::path& path) const {
  std::ofstream out = open_output(path);
  write(out);
}

BpeModel BpeModel::load(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read(in);
}

BpeModel bpe_train(const std::vector<Tokens>& sentences, std::size_t merges) {
  std::map<std::string, long long> word_counts;
  for (const auto& s : sentences) {
    for (const auto& w : s) ++word_counts[w];
  }
  if (word_counts.empty()) throw ValidationError("cannot train BPE on an empty corpus");

  std::vector<std::vector<std::string>> words;
  std::vector<long long> freqs;
  for (const auto& [w, c] : word_counts) {
    words.push_back(initial_symbols(w));
    freqs.push_back(c);
  }

  PairStats stats;
  const auto account = [&](std::size_t w, long long sign) {
    const auto& sym = words[w];
    for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
      stats.add({sym[i], sym[i + 1]}, sign * freqs[w], w);
    }
  };
  for (std::size_t w = 0; w < words.size(); ++w) account(w, +1);

  std::vector<BpeMerge> learned;
  while (learned.size() < merges && !stats.empty() && stats.best_count() >= 2) {
    const SymbolPair best = stats.best();
    const std::set<std::size_t> affected = stats.words_with(best);
    for (std::size_t w : affected) {
      const auto& sym = words[w];
      bool has = false;
      for (std::size_t i = 0; i + 1 < sym.size() && !has; ++i) {
        has = sym[i] == best.first && sym[i + 1] == best.second;
      }
      if (!has) continue;
      account(w, -1);
      words[w] = merge_pair(words[w], best);
      account(w, +1);
    }
    learned.push_back({best.first, best.second});
  }
  return BpeModel(std::move(learned));
}

std::vector<std::string> bpe_apply(const BpeModel& model, std::string_view word) {
  return model.segment(word);
}

std::string bpe_join(const std::vector<std::string>& pieces) {
  std::string out;
  for (const auto& p : pieces) {
    std::string_view v = p;
    if (v.size() >= BpeModel::kEndOfWord.size() &&
        v.substr(v.size() - BpeModel::kEndOfWord.size()) == BpeModel::kEndOfWord) {
      v.remove_suffix(BpeModel::kEndOfWord.size());
    }
    out.append(v);
  }
  return out;
}

}  // namespace pbsmt
