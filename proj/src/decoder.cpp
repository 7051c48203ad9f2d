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

#include "pbsmt/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <unordered_set>

#include "pbsmt/error.hpp"
#include "pbsmt/parallel.hpp"

namespace pbsmt {
namespace {

constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "p_tgt_src", "lex_tgt_src", "p_src_tgt",      "lex_src_tgt", "lm",
    "word_penalty", "phrase_penalty", "distortion", "oov"};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kNoOption = std::numeric_limits<std::size_t>::max();

struct Option {
  DerivationStep step;
  FeatureVector features{};  // everything except LM and distortion
  double static_score = 0.0;
  double estimate = 0.0;
  std::vector<WordId> lm_ids;
};

class Coverage {
 public:
  explicit Coverage(std::size_t n) : words_((n + 63) / 64, 0) {}

  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool any_in(std::size_t b, std::size_t e) const {
    for (std::size_t i = b; i < e; ++i) {
      if (test(i)) return true;
    }
    return false;
  }
  const std::vector<std::uint64_t>& words() const { return words_; }
  bool operator==(const Coverage&) const = default;

 private:
  std::vector<std::uint64_t> words_;
};

struct Arc {
  std::size_t prev = 0;
  std::size_t option = kNoOption;
  double delta = 0.0;
};

struct Node {
  Coverage coverage;
  NGramModel::State state;
  std::size_t last_end = 0;
  double score = 0.0;
  double future = 0.0;
  std::vector<Arc> arcs;
};

// Hypotheses are recombined when coverage, LM state and last end agree.
struct NodeHash {
  const std::vector<Node>* nodes;
  std::size_t operator()(std::size_t id) const {
    const Node& n = (*nodes)[id];
    std::size_t h = NGramHash{}(n.state) ^ (n.last_end * 0x9e3779b97f4a7c15ULL);
    for (auto w : n.coverage.words()) h = (h ^ w) * 0x100000001b3ULL;
    return h;
  }
};

struct NodeEq {
  const std::vector<Node>* nodes;
  bool operator()(std::size_t a, std::size_t b) const {
    const Node& x = (*nodes)[a];
    const Node& y = (*nodes)[b];
    return x.last_end == y.last_end && x.state == y.state && x.coverage == y.coverage;
  }
};

struct SearchGraph {
  std::vector<Node> nodes;  // nodes[0] is the empty hypothesis
  std::size_t goal = 0;     // index of the virtual goal node, 0 if unreachable
};

double log10_score(double p) { return std::log10(std::max(p, 1e-300)); }

std::vector<Option> build_options(const Tokens& sentence, const PhraseTable& table,
                                  const NGramModel& lm, const FeatureWeights& weights,
                                  const DecoderParams& params,
                                  const std::vector<double>& lm_upper_bound) {
  std::vector<Option> out;
  const std::size_t n = sentence.size();
  const std::span<const std::string> words(sentence);
  for (std::size_t b = 0; b < n; ++b) {
    const std::size_t span_end = std::min(n, b + params.max_phrase_length);
    for (std::size_t e = b + 1; e <= span_end; ++e) {
      std::vector<Option> span_options;
      if (const auto* found = table.find(words.subspan(b, e - b))) {
        for (const auto& po : *found) {
          Option o;
          o.step = {b, e, po.target, po.scores, false};
          span_options.push_back(std::move(o));
        }
      }
      if (e == b + 1 && span_options.empty()) {
        Option o;
        o.step = {b, e, {sentence[b]}, PhraseScores{}, true};
        span_options.push_back(std::move(o));
      }
      for (auto& o : span_options) {
        auto& f = o.features;
        f[kTargetGivenSource] = log10_score(o.step.scores.target_given_source);
        f[kLexTargetGivenSource] = log10_score(o.step.scores.lex_target_given_source);
        f[kSourceGivenTarget] = log10_score(o.step.scores.source_given_target);
        f[kLexSourceGivenTarget] = log10_score(o.step.scores.lex_source_given_target);
        f[kWordPenalty] = -static_cast<double>(o.step.target.size());
        f[kPhrasePenalty] = -1.0;
        f[kOov] = o.step.oov ? -params.oov_penalty : 0.0;
        o.static_score = dot(weights.values, f);
        double lm_bound = 0.0;
        for (const auto& t : o.step.target) {
          const WordId id = lm.id(t);
          o.lm_ids.push_back(id);
          lm_bound += id < lm_upper_bound.size() ? lm_upper_bound[id] : 0.0;
        }
        o.estimate = o.static_score + weights[kLanguageModel] * lm_bound;
      }
      std::stable_sort(span_options.begin(), span_options.end(),
                       [](const Option& a, const Option& b) {
                         if (a.estimate != b.estimate) return a.estimate > b.estimate;
                         return a.step.target < b.step.target;
                       });
      if (params.max_options > 0 && span_options.size() > params.max_options) {
        span_options.resize(params.max_options);
      }
      for (auto& o : span_options) out.push_back(std::move(o));
    }
  }
  return out;
}

// future[b][e]: best estimated score of covering [b, e) in any segmentation.
std::vector<std::vector<double>> future_costs(std::size_t n, const std::vector<Option>& options,
                                              bool enabled) {
  std::vector<std::vector<double>> fc(n + 1, std::vector<double>(n + 1, enabled ? kNegInf : 0.0));
  if (!enabled) return fc;
  for (std::size_t b = 0; b <= n; ++b) fc[b][b] = 0.0;
  for (const auto& o : options) {
    auto& cell = fc[o.step.source_begin][o.step.source_end];
    cell = std::max(cell, o.estimate);
  }
  for (std::size_t len = 2; len <= n; ++len) {
    for (std::size_t b = 0; b + len <= n; ++b) {
      const std::size_t e = b + len;
      for (std::size_t k = b + 1; k < e; ++k) fc[b][e] = std::max(fc[b][e], fc[b][k] + fc[k][e]);
    }
  }
  return fc;
}

double coverage_future(const Coverage& cov, std::size_t n,
                       const std::vector<std::vector<double>>& fc) {
  double total = 0.0;
  std::size_t i = 0;
  while (i < n) {
    if (cov.test(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !cov.test(j)) ++j;
    total += fc[i][j];
    i = j;
  }
  return total;
}

SearchGraph search(const Tokens& sentence, const std::vector<Option>& options,
                   const NGramModel& lm, const FeatureWeights& weights,
                   const DecoderParams& params) {
  const std::size_t n = sentence.size();
  const auto fc = future_costs(n, options, params.future_cost);

  std::vector<std::vector<std::size_t>> by_start(n);
  for (std::size_t i = 0; i < options.size(); ++i) by_start[options[i].step.source_begin].push_back(i);

  SearchGraph g;
  g.nodes.reserve(1024);
  g.nodes.push_back(Node{Coverage(n), lm.begin_state(), 0, 0.0, fc[0][n], {}});

  std::vector<std::vector<std::size_t>> stacks(n + 1);
  using Index = std::unordered_set<std::size_t, NodeHash, NodeEq>;
  std::vector<Index> index;
  for (std::size_t c = 0; c <= n; ++c) index.emplace_back(16, NodeHash{&g.nodes}, NodeEq{&g.nodes});
  stacks[0].push_back(0);

  const double log_threshold =
      params.beam_threshold > 0.0 ? std::log10(params.beam_threshold) : kNegInf;

  for (std::size_t s = 0; s < n; ++s) {
    auto& stack = stacks[s];
    std::stable_sort(stack.begin(), stack.end(), [&](std::size_t a, std::size_t b) {
      return g.nodes[a].score + g.nodes[a].future > g.nodes[b].score + g.nodes[b].future;
    });
    if (stack.size() > params.stack_size) stack.resize(params.stack_size);
    if (!stack.empty() && log_threshold > kNegInf) {
      const double best = g.nodes[stack.front()].score + g.nodes[stack.front()].future;
      while (!stack.empty() &&
             g.nodes[stack.back()].score + g.nodes[stack.back()].future < best + log_threshold) {
        stack.pop_back();
      }
    }

    for (const std::size_t hyp : stack) {
      for (std::size_t b = 0; b < n; ++b) {
        if (g.nodes[hyp].coverage.test(b)) continue;
        const auto last_end = g.nodes[hyp].last_end;
        const auto jump = b > last_end ? b - last_end : last_end - b;
        if (params.distortion_limit >= 0 &&
            jump > static_cast<std::size_t>(params.distortion_limit)) {
          continue;
        }
        for (const std::size_t oi : by_start[b]) {
          const Option& o = options[oi];
          const std::size_t e = o.step.source_end;
          if (g.nodes[hyp].coverage.any_in(b, e)) continue;

          NGramModel::State state = g.nodes[hyp].state;
          NGramModel::State next;
          double lm_score = 0.0;
          for (const WordId id : o.lm_ids) {
            lm_score += lm.score(state, id, next);
            state = next;
          }
          const double delta = o.static_score + weights[kLanguageModel] * lm_score -
                               weights[kDistortion] * static_cast<double>(jump);

          Node cand{g.nodes[hyp].coverage, state, e, g.nodes[hyp].score + delta, 0.0, {}};
          for (std::size_t i = b; i < e; ++i) cand.coverage.set(i);
          const std::size_t covered = s + (e - b);

          g.nodes.push_back(std::move(cand));
          const std::size_t id = g.nodes.size() - 1;
          const auto [it, inserted] = index[covered].insert(id);
          if (!inserted) {
            const double score = g.nodes[id].score;
            g.nodes.pop_back();
            Node& existing = g.nodes[*it];
            existing.arcs.push_back({hyp, oi, delta});
            existing.score = std::max(existing.score, score);
            continue;
          }
          Node& added = g.nodes[id];
          added.future = coverage_future(added.coverage, n, fc);
          added.arcs.push_back({hyp, oi, delta});
          stacks[covered].push_back(id);
        }
      }
    }
  }

  if (stacks[n].empty()) return g;
  Node goal{Coverage(n), NGramModel::State(), n, kNegInf, 0.0, {}};
  for (const std::size_t id : stacks[n]) {
    NGramModel::State next;
    const double delta = weights[kLanguageModel] * lm.score(g.nodes[id].state, kEosId, next);
    goal.arcs.push_back({id, kNoOption, delta});
    goal.score = std::max(goal.score, g.nodes[id].score + delta);
  }
  g.nodes.push_back(std::move(goal));
  g.goal = g.nodes.size() - 1;
  return g;
}

// Lazy k-best derivations over the search graph.
class KBest {
 public:
  explicit KBest(const SearchGraph& g) : g_(g), lists_(g.nodes.size()) {}

  std::optional<double> score(std::size_t v, std::size_t k) {
    if (v == 0) return k == 0 ? std::optional<double>(0.0) : std::nullopt;
    auto& l = lists_[v];
    if (!l.initialized) {
      l.initialized = true;
      const auto& arcs = g_.nodes[v].arcs;
      for (std::size_t a = 0; a < arcs.size(); ++a) {
        if (auto s = score(arcs[a].prev, 0)) l.heap.push({*s + arcs[a].delta, a, 0});
      }
    }
    while (l.found.size() <= k && !l.heap.empty()) {
      const Candidate c = l.heap.top();
      l.heap.pop();
      l.found.push_back(c);
      const Arc& arc = g_.nodes[v].arcs[c.arc];
      if (auto s = score(arc.prev, c.rank + 1)) l.heap.push({*s + arc.delta, c.arc, c.rank + 1});
    }
    if (k < l.found.size()) return l.found[k].score;
    return std::nullopt;
  }

  // Option indices of the k-th derivation of v, in source-to-target order.
  std::vector<std::size_t> derivation(std::size_t v, std::size_t k) const {
    std::vector<std::size_t> path;
    while (v != 0) {
      const Candidate& c = lists_[v].found[k];
      const Arc& arc = g_.nodes[v].arcs[c.arc];
      if (arc.option != kNoOption) path.push_back(arc.option);
      v = arc.prev;
      k = c.rank;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

 private:
  struct Candidate {
    double score;
    std::size_t arc;
    std::size_t rank;
    bool operator<(const Candidate& o) const {
      if (score != o.score) return score < o.score;
      if (arc != o.arc) return arc > o.arc;
      return rank > o.rank;
    }
  };
  struct List {
    bool initialized = false;
    std::vector<Candidate> found;
    std::priority_queue<Candidate> heap;
  };

  const SearchGraph& g_;
  std::vector<List> lists_;
};

}  // namespace

std::string_view feature_name(std::size_t f) { return kFeatureNames.at(f); }

std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    if (kFeatureNames[f] == name) return f;
  }
  return std::nullopt;
}

double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t f = 0; f < kNumFeatures; ++f) s += a[f] * b[f];
  return s;
}

void FeatureWeights::write(std::ostream& out) const {
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    out << kFeatureNames[f] << " = " << format_double(values[f], 17) << '\n';
  }
}

FeatureWeights FeatureWeights::read(std::istream& in) {
  FeatureWeights w;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const auto t = trim(std::string_view(line).substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected `feature = value`", lineno);
    const auto name = trim(t.substr(0, eq));
    const auto f = feature_index(name);
    if (!f) throw ParseError("unknown feature '" + std::string(name) + "'", lineno);
    const double v = parse_double(trim(t.substr(eq + 1)), lineno);
    if (!std::isfinite(v)) throw ParseError("weight must be finite", lineno);
    w.values[*f] = v;
  }
  return w;
}

void FeatureWeights::save(const std::filesystem::path& path) const {
  std::ofstream out = open_output(path);
  write(out);
}

FeatureWeights FeatureWeights::load(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read(in);
}

FeatureVector derivation_features(const std::vector<DerivationStep>& steps, const NGramModel& lm,
                                  const DecoderParams& params) {
  FeatureVector f{};
  if (steps.empty()) return f;
  Tokens output;
  std::size_t prev_end = 0;
  for (const auto& s : steps) {
    f[kTargetGivenSource] += log10_score(s.scores.target_given_source);
    f[kLexTargetGivenSource] += log10_score(s.scores.lex_target_given_source);
    f[kSourceGivenTarget] += log10_score(s.scores.source_given_target);
    f[kLexSourceGivenTarget] += log10_score(s.scores.lex_source_given_target);
    f[kWordPenalty] -= static_cast<double>(s.target.size());
    f[kPhrasePenalty] -= 1.0;
    if (s.oov) f[kOov] -= params.oov_penalty;
    const double jump = s.source_begin > prev_end ? static_cast<double>(s.source_begin - prev_end)
                                                  : static_cast<double>(prev_end - s.source_begin);
    f[kDistortion] -= jump;
    prev_end = s.source_end;
    output.insert(output.end(), s.target.begin(), s.target.end());
  }
  f[kLanguageModel] = lm.score_sentence(output);
  return f;
}

Decoder::Decoder(const PhraseTable& table, const NGramModel& lm, FeatureWeights weights,
                 DecoderParams params)
    : table_(table), lm_(lm), weights_(weights), params_(params) {
  if (params_.stack_size < 1) throw ValidationError("stack size must be at least 1");
  if (!(params_.beam_threshold >= 0.0 && params_.beam_threshold <= 1.0)) {
    throw ValidationError("beam threshold must be in [0, 1]");
  }
  if (params_.max_phrase_length < 1) throw ValidationError("max phrase length must be at least 1");
  for (double w : weights_.values) {
    if (!std::isfinite(w)) throw ValidationError("feature weights must be finite");
  }
  lm_upper_bound_ = lm_.max_log_prob_by_word();
}

std::vector<DerivationStep> Decoder::options(const Tokens& sentence) const {
  std::vector<DerivationStep> out;
  for (auto& o : build_options(sentence, table_, lm_, weights_, params_, lm_upper_bound_)) {
    out.push_back(std::move(o.step));
  }
  return out;
}

std::vector<Translation> Decoder::nbest(const Tokens& sentence, std::size_t n) const {
  if (n < 1) throw ValidationError("n-best size must be at least 1");
  if (sentence.empty()) return {Translation{}};

  const auto opts = build_options(sentence, table_, lm_, weights_, params_, lm_upper_bound_);
  const SearchGraph g = search(sentence, opts, lm_, weights_, params_);
  if (g.goal == 0) {
    throw DecodeError("no hypothesis covers all " + std::to_string(sentence.size()) +
                      " source words");
  }

  KBest kbest(g);
  std::vector<Translation> out;
  std::unordered_set<std::string> seen;
  const std::size_t cap = 50 * n + 100;
  for (std::size_t k = 0; k < cap && out.size() < n; ++k) {
    const auto score = kbest.score(g.goal, k);
    if (!score) break;
    Translation t;
    t.score = *score;
    for (const std::size_t oi : kbest.derivation(g.goal, k)) {
      t.steps.push_back(opts[oi].step);
      t.tokens.insert(t.tokens.end(), opts[oi].step.target.begin(), opts[oi].step.target.end());
    }
    if (!seen.insert(join(t.tokens)).second) continue;
    t.features = derivation_features(t.steps, lm_, params_);
    out.push_back(std::move(t));
  }
  return out;
}

Translation Decoder::decode(const Tokens& sentence) const {
  return std::move(nbest(sentence, 1).front());
}

std::vector<Translation> decode_all(const Decoder& decoder, const std::vector<Tokens>& sentences,
                                    std::size_t threads) {
  std::vector<Translation> out(sentences.size());
  parallel_for(sentences.size(), threads, [&](std::size_t i) {
    try {
      out[i] = decoder.decode(sentences[i]);
    } catch (const DecodeError& e) {
      throw DecodeError("sentence " + std::to_string(i + 1) + ": " + e.what());
    }
  });
  return out;
}

void write_nbest(std::ostream& out, std::size_t sentence_id,
                 const std::vector<Translation>& list) {
  for (const auto& t : list) {
    out << sentence_id << " ||| " << join(t.tokens) << " |||";
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      out << ' ' << kFeatureNames[f] << ':' << format_double(t.features[f], 17);
    }
    out << " ||| " << format_double(t.score, 17) << '\n';
  }
}

std::vector<NBestEntry> read_nbest(std::istream& in) {
  std::vector<NBestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_on(line, "|||");
    if (fields.size() != 4) throw ParseError("expected 4 fields separated by |||", lineno);
    NBestEntry e;
    const auto id = parse_int(trim(fields[0]), lineno);
    if (id < 0) throw ParseError("negative sentence id", lineno);
    e.sentence_id = static_cast<std::size_t>(id);
    e.tokens = split_whitespace(fields[1]);
    std::vector<bool> set(kNumFeatures, false);
    for (const auto& pair : split_whitespace(fields[2])) {
      const auto colon = pair.rfind(':');
      if (colon == std::string::npos) throw ParseError("expected name:value", lineno);
      const auto f = feature_index(std::string_view(pair).substr(0, colon));
      if (!f) throw ParseError("unknown feature '" + pair.substr(0, colon) + "'", lineno);
      e.features[*f] = parse_double(std::string_view(pair).substr(colon + 1), lineno);
      set[*f] = true;
    }
    if (std::find(set.begin(), set.end(), false) != set.end()) {
      throw ParseError("missing feature values", lineno);
    }
    e.score = parse_double(trim(fields[3]), lineno);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace pbsmt
