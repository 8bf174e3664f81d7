/*
 * Copyright 2026 The Stancy Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stancy {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed a value outside an operation's precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

// Internal/type contract violated (wrong variant, malformed sequence, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class AlignmentError : public Error {
 public:
  AlignmentError(const std::string& what, std::vector<std::string> offenders)
      : Error(what), offenders_(std::move(offenders)) {}
  const std::vector<std::string>& offenders() const { return offenders_; }

 private:
  std::vector<std::string> offenders_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid config:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace stancy
