// Copyright 2026 The semivc Authors. All Rights Reserved.
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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace semivc {

// Caller supplied something that violates an operation's precondition
// (shape mismatch, empty corpus, bad path). The CLI maps this to exit code 1.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A file was readable but its contents do not parse.
class FormatError : public InputError {
 public:
  FormatError(const std::string& what, std::uint64_t byte_offset)
      : InputError(what + " (at byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}

  std::uint64_t byte_offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class UnsupportedError : public InputError {
 public:
  using InputError::InputError;
};

// Bad or incomplete configuration (missing key, insufficient data for a sweep).
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

// Statistics cannot be estimated from the given data.
class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during fitting or training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace semivc
