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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pbsmt {

using Tokens = std::vector<std::string>;

// Splits on ASCII whitespace, dropping empty fields.
Tokens split_whitespace(std::string_view line);

std::string join(const Tokens& tokens, std::string_view sep = " ");

std::vector<std::string> split_on(std::string_view text, std::string_view delim);

std::string_view trim(std::string_view text);

// Whole-file line reading; a trailing newline does not produce an empty last
// line and a trailing '\r' is stripped. Throws IoError if the file is missing.
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::vector<Tokens> read_tokenized(const std::filesystem::path& path);

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

void write_tokenized(const std::filesystem::path& path, const std::vector<Tokens>& sentences);

std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

// Shortest "%.Ng" rendering, used wherever values must round-trip through text.
std::string format_double(double value, int significant_digits = 10);

// Fixed-point rendering ("66.32").
std::string format_fixed(double value, int decimals);

// Strict parses: the whole string must be consumed. Throw ParseError.
double parse_double(std::string_view text, std::size_t line = 0);
long long parse_int(std::string_view text, std::size_t line = 0);

}  // namespace pbsmt
