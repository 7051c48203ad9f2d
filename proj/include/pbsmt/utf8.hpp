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

#include <string>
#include <string_view>
#include <vector>

namespace pbsmt::utf8 {

// Decodes a UTF-8 string into code points. Throws EncodingError (line 0) on
// malformed input: bad lead bytes, truncated sequences, overlong forms,
// surrogates and values above U+10FFFF.
std::vector<char32_t> decode(std::string_view text);

bool is_valid(std::string_view text);

void append(std::string& out, char32_t cp);

std::string encode(const std::vector<char32_t>& cps);

// Splits into one string per code point.
std::vector<std::string> split_code_points(std::string_view text);

std::size_t length(std::string_view text);

}  // namespace pbsmt::utf8
