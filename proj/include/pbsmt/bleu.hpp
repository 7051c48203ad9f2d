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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pbsmt/text.hpp"

namespace pbsmt {

inline constexpr std::size_t kBleuMaxOrder = 4;

// Sufficient statistics; additive over sentences.
struct BleuStats {
  std::array<std::uint64_t, kBleuMaxOrder> matches{};
  std::array<std::uint64_t, kBleuMaxOrder> totals{};
  std::uint64_t hypothesis_length = 0;
  std::uint64_t reference_length = 0;

  BleuStats& operator+=(const BleuStats& other);
  BleuStats& operator-=(const BleuStats& other);
  bool operator==(const BleuStats&) const = default;
};

BleuStats sentence_stats(const Tokens& hypothesis, const Tokens& reference,
                         std::size_t max_order = kBleuMaxOrder);

// Orders with no hypothesis n-grams (hypothesis shorter than n) are left out
// of the geometric mean and reported with precision 1, so bleu(h, h) is 100
// for every non-empty h.
// kNone: a zero precision yields BLEU 0.
// kExp: the k-th order with zero matches counts 1 / (2^k * total n-grams).
enum class BleuSmoothing { kNone, kExp };

struct BleuReport {
  std::vector<double> precisions;
  double brevity_penalty = 1.0;
  std::uint64_t hypothesis_length = 0;
  std::uint64_t reference_length = 0;
  double score = 0.0;  // 0..100

  std::string summary() const;
};

BleuReport bleu_from_stats(const BleuStats& stats, std::size_t max_order = kBleuMaxOrder,
                           BleuSmoothing smoothing = BleuSmoothing::kExp);

// Corpus BLEU. Throws ValidationError on a line-count mismatch or an empty corpus.
BleuReport bleu(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
                std::size_t max_order = kBleuMaxOrder,
                BleuSmoothing smoothing = BleuSmoothing::kExp);

}  // namespace pbsmt
