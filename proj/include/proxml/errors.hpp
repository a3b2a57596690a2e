/*
 * Copyright 2026 The proxml authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef PROXML_ERRORS_HPP_
#define PROXML_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace proxml {

// Malformed input data (bad header, index out of range, duplicate feature,
// wrong line count). Carries the 1-based line number when known.
class DataError : public std::runtime_error {
 public:
  DataError(std::string message, size_t line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + std::move(message)
                                    : std::move(message)),
        line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// Numerical failure inside a solver (step-size underflow, non-convergence
// in strict mode).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model file problems: unreadable path, bad magic/version, truncation,
// checksum mismatch.
class ModelIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace proxml

#endif  // PROXML_ERRORS_HPP_
