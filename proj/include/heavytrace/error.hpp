/*
 * Copyright (c) The heavytrace Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HEAVYTRACE_ERROR_HPP
#define HEAVYTRACE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace heavytrace {

/// Base for every error raised by the library. Invalid parameters are
/// reported with std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed trace input. `line()` is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Too few events, intervals or points for the requested statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A trace with a header but no events.
class EmptyLogError : public InsufficientDataError {
 public:
  EmptyLogError() : InsufficientDataError("trace contains no events") {}
};

/// Numerical fit did not converge or is degenerate.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace heavytrace

#endif  // HEAVYTRACE_ERROR_HPP
