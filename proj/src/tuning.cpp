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

#include "pbsmt/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>

#include "pbsmt/error.hpp"
#include "pbsmt/parallel.hpp"

namespace pbsmt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinGain = 1e-10;

double stats_bleu(const BleuStats& s) { return bleu_from_stats(s).score; }

struct HullLine {
  double slope;
  double intercept;
  std::size_t candidate;
  double start;  // left end of the interval where this line is maximal
};

std::vector<HullLine> upper_envelope(const std::vector<TuneCandidate>& list,
                                     const FeatureWeights& weights, std::size_t feature) {
  std::vector<HullLine> lines;
  lines.reserve(list.size());
  for (std::size_t c = 0; c < list.size(); ++c) {
    const double slope = list[c].features[feature];
    const double intercept = dot(weights.values, list[c].features) - weights[feature] * slope;
    lines.push_back({slope, intercept, c, -kInf});
  }
  std::stable_sort(lines.begin(), lines.end(), [](const HullLine& a, const HullLine& b) {
    if (a.slope != b.slope) return a.slope < b.slope;
    return a.intercept > b.intercept;
  });
  std::vector<HullLine> hull;
  for (const auto& l : lines) {
    if (!hull.empty() && hull.back().slope == l.slope) continue;
    while (!hull.empty()) {
      const auto& top = hull.back();
      const double x = (top.intercept - l.intercept) / (l.slope - top.slope);
      if (x <= top.start) {
        hull.pop_back();
        continue;
      }
      hull.push_back({l.slope, l.intercept, l.candidate, x});
      break;
    }
    if (hull.empty()) hull.push_back({l.slope, l.intercept, l.candidate, -kInf});
  }
  return hull;
}

}  // namespace

double pool_bleu(const CandidatePool& pool, const FeatureWeights& weights) {
  BleuStats total;
  for (const auto& list : pool) {
    if (list.empty()) continue;
    std::size_t best = 0;
    double best_score = dot(weights.values, list[0].features);
    for (std::size_t c = 1; c < list.size(); ++c) {
      const double s = dot(weights.values, list[c].features);
      if (s > best_score) {
        best = c;
        best_score = s;
      }
    }
    total += list[best].stats;
  }
  return stats_bleu(total);
}

LineSearchResult line_search(const CandidatePool& pool, const FeatureWeights& weights,
                             std::size_t feature) {
  struct Event {
    double x;
    std::size_t sentence;
    std::size_t from;
    std::size_t to;
  };
  BleuStats total;
  std::vector<Event> events;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].empty()) continue;
    const auto hull = upper_envelope(pool[i], weights, feature);
    total += pool[i][hull.front().candidate].stats;
    for (std::size_t k = 1; k < hull.size(); ++k) {
      events.push_back({hull[k].start, i, hull[k - 1].candidate, hull[k].candidate});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.x < b.x; });

  const double current = weights[feature];
  double best_bleu = stats_bleu(total);
  double best_lo = -kInf;
  double best_hi = events.empty() ? kInf : events.front().x;
  double current_bleu = current < best_hi ? best_bleu : -1.0;

  std::size_t e = 0;
  while (e < events.size()) {
    const double x = events[e].x;
    while (e < events.size() && events[e].x == x) {
      total -= pool[events[e].sentence][events[e].from].stats;
      total += pool[events[e].sentence][events[e].to].stats;
      ++e;
    }
    const double hi = e < events.size() ? events[e].x : kInf;
    const double b = stats_bleu(total);
    if (current > x && current < hi) current_bleu = b;
    if (b > best_bleu + kMinGain) {
      best_bleu = b;
      best_lo = x;
      best_hi = hi;
    }
  }

  if (current_bleu >= best_bleu - kMinGain) return {current, std::max(current_bleu, best_bleu)};
  double value;
  if (std::isinf(best_lo) && std::isinf(best_hi)) {
    value = current;
  } else if (std::isinf(best_lo)) {
    value = best_hi - 1.0;
  } else if (std::isinf(best_hi)) {
    value = best_lo + 1.0;
  } else {
    value = 0.5 * (best_lo + best_hi);
  }
  return {value, best_bleu};
}

FeatureWeights optimize_weights(const CandidatePool& pool, const FeatureWeights& start,
                                std::size_t restarts, Rng& rng) {
  std::vector<FeatureWeights> starts{start};
  for (std::size_t r = 0; r < restarts; ++r) {
    FeatureWeights w;
    for (auto& v : w.values) v = rng.uniform(-1.0, 1.0);
    starts.push_back(w);
  }

  FeatureWeights best = start;
  double best_bleu = pool_bleu(pool, start);
  for (auto w : starts) {
    double bleu = pool_bleu(pool, w);
    for (int round = 0; round < 50; ++round) {
      bool improved = false;
      for (std::size_t f = 0; f < kNumFeatures; ++f) {
        const auto r = line_search(pool, w, f);
        if (r.bleu > bleu + kMinGain) {
          w[f] = r.value;
          bleu = pool_bleu(pool, w);
          improved = true;
        }
      }
      if (!improved) break;
    }
    if (bleu > best_bleu + kMinGain) {
      best = w;
      best_bleu = bleu;
    }
  }
  return best;
}

TuneResult tune_weights(const std::vector<Tokens>& sources, const std::vector<Tokens>& references,
                        const PhraseTable& table, const NGramModel& lm,
                        const DecoderParams& params, const FeatureWeights& initial,
                        const TuneOptions& options) {
  if (sources.empty()) throw ValidationError("tune set is empty");
  if (sources.size() != references.size()) {
    throw SizeError("tune set has " + std::to_string(sources.size()) + " sources but " +
                    std::to_string(references.size()) + " references");
  }
  if (options.nbest < 1) throw ValidationError("n-best size must be at least 1");

  Rng rng(options.seed);
  CandidatePool pool(sources.size());
  std::vector<std::unordered_map<std::string, std::size_t>> seen(sources.size());
  FeatureWeights current = initial;
  TuneResult result;

  for (std::size_t iter = 0; iter < options.iterations; ++iter) {
    const Decoder decoder(table, lm, current, params);
    std::vector<std::optional<std::vector<Translation>>> lists(sources.size());
    parallel_for(sources.size(), options.threads, [&](std::size_t i) {
      try {
        lists[i] = decoder.nbest(sources[i], options.nbest);
      } catch (const DecodeError&) {
        lists[i].reset();
      }
    });
    const auto failures = static_cast<std::size_t>(
        std::count_if(lists.begin(), lists.end(), [](const auto& l) { return !l.has_value(); }));
    if (2 * failures > sources.size()) {
      throw TuningError(std::to_string(failures) + " of " + std::to_string(sources.size()) +
                        " tune sentences failed to decode");
    }

    std::size_t added = 0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (!lists[i]) continue;
      for (auto& t : *lists[i]) {
        const auto key = join(t.tokens);
        if (seen[i].count(key)) continue;
        seen[i].emplace(key, pool[i].size());
        BleuStats stats = sentence_stats(t.tokens, references[i]);
        pool[i].push_back({std::move(t.tokens), t.features, stats});
        ++added;
      }
    }
    result.iterations = iter + 1;
    if (iter > 0 && added == 0) break;
    current = optimize_weights(pool, current, options.restarts, rng);
  }

  for (const auto& l : pool) result.pool_size += l.size();
  result.initial_bleu = pool_bleu(pool, initial);
  const double tuned = pool_bleu(pool, current);
  if (tuned > result.initial_bleu) {
    result.weights = current;
    result.final_bleu = tuned;
  } else {
    result.weights = initial;
    result.final_bleu = result.initial_bleu;
  }
  return result;
}

}  // namespace pbsmt
