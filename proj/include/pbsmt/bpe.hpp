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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pbsmt/text.hpp"

namespace pbsmt {

struct BpeMerge {
  std::string left;
  std::string right;

  std::string merged() const { return left + right; }
  bool operator==(const BpeMerge&) const = default;
};

// Ordered merge list learned by greedy most-frequent-pair merging. Words are
// split into code points with the end-of-word marker glued to the last one,
// so "low" starts as {l, o, w</w>}.
class BpeModel {
 public:
  static constexpr std::string_view kEndOfWord = "</w>";
  // Suffix marking a non-final subword in encoded sentences.
  static constexpr std::string_view kContinuation = "@@";

  BpeModel() = default;
  explicit BpeModel(std::vector<BpeMerge> merges);

  const std::vector<BpeMerge>& merges() const { return merges_; }
  std::size_t merge_count() const { return merges_.size(); }

  // Symbols reachable by the merges: every merge's inputs and output.
  std::set<std::string> vocabulary() const;

  // Segments one word. The last piece carries the end-of-word marker.
  std::vector<std::string> segment(std::string_view word) const;

  // Sentence-level encoding with the `@@` continuation convention.
  Tokens encode(const Tokens& words) const;
  static Tokens decode(const Tokens& pieces);

  // Header line with the merge count, then `left right` per line.
  void write(std::ostream& out) const;
  static BpeModel read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static BpeModel load(const std::filesystem::path& path);

 private:
  std::vector<BpeMerge> merges_;
  std::map<std::pair<std::string, std::string>, std::size_t> ranks_;
};

// Learns up to `merges` operations. Ties on pair frequency go to the
// lexicographically smallest pair; training stops once no pair occurs at
// least twice. Throws ValidationError on an empty corpus.
BpeModel bpe_train(const std::vector<Tokens>& sentences, std::size_t merges);

std::vector<std::string> bpe_apply(const BpeModel& model, std::string_view word);

// Concatenates pieces and drops end-of-word markers.
std::string bpe_join(const std::vector<std::string>& pieces);

}  // namespace pbsmt
