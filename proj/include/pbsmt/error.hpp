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
#include <stdexcept>
#include <string>

namespace pbsmt {

// Base of every error the toolkit throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition (range, emptiness, consistency).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Count mismatch or oversubscription between collections.
class SizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed text input. Carries the 1-based line number, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Byte sequence that is not valid UTF-8.
class EncodingError : public ParseError {
 public:
  using ParseError::ParseError;
};

// File missing or unreadable/unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

// The decoder could not reach a hypothesis covering the whole sentence.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class TuningError : public Error {
 public:
  using Error::Error;
};

}  // namespace pbsmt
