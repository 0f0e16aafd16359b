// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "depdse/error.hpp"

#include <utility>

namespace depdse {

ValidationError::ValidationError(std::string field, const std::string& message)
    : Error(message), field_(std::move(field)) {}

namespace {
std::string parse_message(const std::string& source, int line,
                          const std::string& field, const std::string& msg) {
  std::string out = source;
  if (line > 0) out += ":" + std::to_string(line);
  if (!field.empty()) out += " [" + field + "]";
  out += ": " + msg;
  return out;
}
}  // namespace

ParseError::ParseError(std::string source, int line, std::string field,
                       const std::string& message)
    : Error(parse_message(source, line, field, message)),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

EvaluationError::EvaluationError(std::string term, const std::string& message)
    : Error(message), term_(std::move(term)) {}

}  // namespace depdse
