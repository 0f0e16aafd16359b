// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "depdse/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "depdse/error.hpp"

namespace depdse {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::int64_t parse_count(std::string_view cell, const std::string& source,
                         int line, const std::string& field) {
  std::int64_t value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(source, line, field,
                     "expected an integer count, got '" + std::string(cell) +
                         "'");
  }
  return value;
}

constexpr std::array<std::string_view, 4> kHeader = {"stratum", "x11", "x10",
                                                     "x01"};

}  // namespace

InputFormat parse_input_format(std::string_view name) {
  if (name == "auto") return InputFormat::kAuto;
  if (name == "csv") return InputFormat::kCsv;
  if (name == "json") return InputFormat::kJson;
  throw ParseError("--format", 0, "format",
                   "unknown input format '" + std::string(name) + "'");
}

std::vector<RawStratum> parse_survey_csv(std::string_view text,
                                         const std::string& source) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<RawStratum> rows;
  bool have_header = false;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto cells = split(line, ',');
    if (!have_header) {
      if (cells.size() != kHeader.size() ||
          !std::equal(cells.begin(), cells.end(), kHeader.begin())) {
        throw ParseError(source, line_no, "header",
                         "expected header 'stratum,x11,x10,x01'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != kHeader.size()) {
      throw ParseError(source, line_no, "",
                       "expected 4 fields, got " +
                           std::to_string(cells.size()));
    }
    RawStratum row;
    row.label = std::string(cells[0]);
    row.x11 = parse_count(cells[1], source, line_no, "x11");
    row.x10 = parse_count(cells[2], source, line_no, "x10");
    row.x01 = parse_count(cells[3], source, line_no, "x01");
    rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  if (!have_header) throw ParseError(source, 0, "header", "empty input");
  return rows;
}

std::vector<RawStratum> parse_survey_json(std::string_view text,
                                          const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, "", e.what());
  }
  if (!doc.is_object() || !doc.contains("strata") ||
      !doc["strata"].is_array()) {
    throw ParseError(source, 0, "strata", "expected an object with a 'strata' array");
  }
  std::vector<RawStratum> rows;
  int index = 0;
  for (const auto& item : doc["strata"]) {
    const std::string where = "strata[" + std::to_string(index++) + "]";
    if (!item.is_object()) throw ParseError(source, 0, where, "expected an object");
    RawStratum row;
    if (item.contains("label")) {
      if (!item["label"].is_string()) {
        throw ParseError(source, 0, where + ".label", "expected a string");
      }
      row.label = item["label"].get<std::string>();
    }
    for (const auto& [key, slot] :
         {std::pair{"x11", &row.x11}, {"x10", &row.x10}, {"x01", &row.x01}}) {
      if (!item.contains(key)) {
        throw ParseError(source, 0, where + "." + key, "missing count");
      }
      const auto& v = item[key];
      if (!v.is_number_integer()) {
        throw ParseError(source, 0, where + "." + key, "expected an integer count");
      }
      *slot = v.get<std::int64_t>();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SurveyData read_survey(const std::filesystem::path& path, InputFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (format == InputFormat::kAuto) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    format = ext == ".json" ? InputFormat::kJson : InputFormat::kCsv;
  }
  const auto rows = format == InputFormat::kJson
                        ? parse_survey_json(text, path.string())
                        : parse_survey_csv(text, path.string());
  return validate(rows);
}

}  // namespace depdse
