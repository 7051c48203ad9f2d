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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pbsmt/experiment.hpp"

namespace pbsmt {

// One configurable setting. Keys in [general] map to `--key`, keys in other
// sections to `--section-key`.
struct OptionSpec {
  std::string section;
  std::string key;
  std::string help;

  std::string flag() const;            // without leading dashes
  std::string qualified_key() const;   // `section.key`
};

const std::vector<OptionSpec>& option_specs();

// Returns the spec whose qualified key is `qualified`, or nullptr.
const OptionSpec* find_option(std::string_view qualified);

// Line-oriented `key = value` file with `[section]` headers; keys before any
// header belong to [general]. '#' and ';' start comment lines. Throws
// ParseError for malformed lines, unknown keys and duplicates.
std::map<std::string, std::string> parse_config(std::istream& in);
std::map<std::string, std::string> load_config(const std::filesystem::path& path);

// Typed view over merged config-file and command-line values.
class PipelineConfig {
 public:
  PipelineConfig() = default;
  explicit PipelineConfig(std::map<std::string, std::string> values);

  void set(const std::string& qualified, std::string value);
  bool has(std::string_view qualified) const;
  std::optional<std::string> get(std::string_view qualified) const;

  // Throws ValidationError when the key is unset.
  std::string require(std::string_view qualified) const;
  // Throws ValidationError when unset and IoError when the file is missing.
  std::filesystem::path input_path(std::string_view qualified) const;
  std::optional<std::filesystem::path> optional_input_path(std::string_view qualified) const;
  std::filesystem::path output_path(std::string_view qualified) const;

  double filter_threshold() const;
  std::size_t bpe_merges() const;
  std::uint64_t seed() const;
  std::size_t threads() const;
  std::size_t folds() const;
  std::size_t nbest_size() const;

  // Everything needed to train and decode, weights included; a weights file
  // is applied first and [weights] keys override it.
  SystemConfig system() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  double number(std::string_view qualified, double fallback, double lo, double hi) const;
  long long integer(std::string_view qualified, long long fallback, long long lo,
                    long long hi) const;
  bool boolean(std::string_view qualified, bool fallback) const;

  std::map<std::string, std::string> values_;
};

}  // namespace pbsmt
