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

#include "pbsmt/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>

#include "pbsmt/error.hpp"

namespace pbsmt {
namespace {

using Gram = std::span<const std::string>;

struct GramLess {
  bool operator()(Gram a, Gram b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

std::map<Gram, std::uint64_t, GramLess> gram_counts(const Tokens& tokens, std::size_t n) {
  std::map<Gram, std::uint64_t, GramLess> counts;
  if (tokens.size() < n) return counts;
  const Gram all(tokens);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[all.subspan(i, n)];
  return counts;
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < kBleuMaxOrder; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hypothesis_length += other.hypothesis_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats& BleuStats::operator-=(const BleuStats& other) {
  for (std::size_t n = 0; n < kBleuMaxOrder; ++n) {
    matches[n] -= other.matches[n];
    totals[n] -= other.totals[n];
  }
  hypothesis_length -= other.hypothesis_length;
  reference_length -= other.reference_length;
  return *this;
}

BleuStats sentence_stats(const Tokens& hypothesis, const Tokens& reference,
                         std::size_t max_order) {
  if (max_order < 1 || max_order > kBleuMaxOrder) {
    throw ValidationError("BLEU order must be in [1, 4]");
  }
  BleuStats s;
  s.hypothesis_length = hypothesis.size();
  s.reference_length = reference.size();
  for (std::size_t n = 1; n <= max_order; ++n) {
    const auto hyp = gram_counts(hypothesis, n);
    const auto ref = gram_counts(reference, n);
    for (const auto& [g, c] : hyp) {
      auto it = ref.find(g);
      if (it != ref.end()) s.matches[n - 1] += std::min(c, it->second);
      s.totals[n - 1] += c;
    }
  }
  return s;
}

BleuReport bleu_from_stats(const BleuStats& stats, std::size_t max_order, BleuSmoothing smoothing) {
  BleuReport r;
  r.hypothesis_length = stats.hypothesis_length;
  r.reference_length = stats.reference_length;
  if (stats.hypothesis_length == 0) {
    r.precisions.assign(max_order, 0.0);
    r.brevity_penalty = stats.reference_length == 0 ? 1.0 : 0.0;
    return r;
  }
  double log_sum = 0.0;
  std::size_t effective_order = 0;
  double smoothing_scale = 1.0;
  bool zero = false;
  for (std::size_t n = 0; n < max_order; ++n) {
    if (stats.totals[n] == 0) {
      r.precisions.push_back(1.0);
      continue;
    }
    ++effective_order;
    const double total = static_cast<double>(stats.totals[n]);
    double p = static_cast<double>(stats.matches[n]) / total;
    r.precisions.push_back(p);
    if (p == 0.0) {
      if (smoothing == BleuSmoothing::kNone) {
        zero = true;
        continue;
      }
      smoothing_scale *= 2.0;
      p = 1.0 / (smoothing_scale * total);
    }
    log_sum += std::log(p);
  }
  const double h = static_cast<double>(stats.hypothesis_length);
  const double ref = static_cast<double>(stats.reference_length);
  r.brevity_penalty = h < ref ? std::exp(1.0 - ref / h) : 1.0;
  if (zero) return r;
  r.score = 100.0 * r.brevity_penalty * std::exp(log_sum / static_cast<double>(effective_order));
  return r;
}

BleuReport bleu(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
                std::size_t max_order, BleuSmoothing smoothing) {
  if (hypotheses.size() != references.size()) {
    throw ValidationError("BLEU needs equal line counts: " + std::to_string(hypotheses.size()) +
                          " hypotheses vs " + std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw ValidationError("BLEU of an empty corpus");
  BleuStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    total += sentence_stats(hypotheses[i], references[i], max_order);
  }
  return bleu_from_stats(total, max_order, smoothing);
}

std::string BleuReport::summary() const {
  std::string out = "BLEU = " + format_fixed(score, 2) + ", ";
  for (std::size_t n = 0; n < precisions.size(); ++n) {
    if (n) out += '/';
    out += format_fixed(100.0 * precisions[n], 1);
  }
  out += " (BP=" + format_fixed(brevity_penalty, 3) + ", hyp_len=" +
         std::to_string(hypothesis_length) + ", ref_len=" + std::to_string(reference_length) + ")";
  return out;
}

}  // namespace pbsmt
