// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// Count-table input formats.
//
// CSV:  header `stratum,x11,x10,x01` followed by exactly two data rows.
// JSON: {"strata":[{"label":..,"x11":..,"x10":..,"x01":..},{..}]}
//
// Both are UTF-8, integers without thousands separators.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "depdse/tables.hpp"

namespace depdse {

enum class InputFormat { kAuto, kCsv, kJson };

InputFormat parse_input_format(std::string_view name);

/// Parses CSV text. `source` is used in error messages only.
std::vector<RawStratum> parse_survey_csv(std::string_view text,
                                         const std::string& source = "<csv>");
std::vector<RawStratum> parse_survey_json(std::string_view text,
                                          const std::string& source = "<json>");

/// Reads and validates a survey file. kAuto picks the format from the file
/// extension (".json" -> JSON, anything else -> CSV).
SurveyData read_survey(const std::filesystem::path& path,
                       InputFormat format = InputFormat::kAuto);

}  // namespace depdse
