// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace depdse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input counts. `field()` names the offending
/// field, e.g. "x11A".
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Input file could not be parsed. Line is 1-based; 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(std::string source, int line, std::string field,
             const std::string& message);
  const std::string& source() const noexcept { return source_; }
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string source_;
  int line_;
  std::string field_;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The log-likelihood (or a derivative) hit a non-positive log argument
/// carrying a nonzero count. `term()` names the offending term.
class EvaluationError : public Error {
 public:
  EvaluationError(std::string term, const std::string& message);
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

}  // namespace depdse
