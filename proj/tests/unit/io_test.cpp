// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "depdse/error.hpp"
#include "depdse/io.hpp"
#include "test_data.hpp"

namespace depdse {
namespace {

TEST(ParseCsv, ReadsTwoRows) {
  const auto rows = parse_survey_csv(
      "stratum,x11,x10,x01\nsmall_medium,100,8900,3641\nlarge,534,2584,3780\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].label, "small_medium");
  EXPECT_EQ(rows[1].x01, 3780);
}

TEST(ParseCsv, ToleratesBomCrlfAndBlankLines) {
  const auto rows = parse_survey_csv(
      "\xEF\xBB\xBFstratum,x11,x10,x01\r\n\r\na,1,2,3\r\nb,4,5,6\r\n\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].x11, 4);
}

TEST(ParseCsv, BadHeader) {
  try {
    parse_survey_csv("label,x11,x10,x01\na,1,2,3\n", "in.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.field(), "header");
  }
}

TEST(ParseCsv, NonIntegerReportsLineAndField) {
  try {
    parse_survey_csv("stratum,x11,x10,x01\na,1,2,3\nb,4,5.5,6\n", "in.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.source(), "in.csv");
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.field(), "x10");
    EXPECT_NE(std::string(e.what()).find("in.csv:3"), std::string::npos);
  }
}

TEST(ParseCsv, ThousandsSeparatorRejected) {
  EXPECT_THROW(parse_survey_csv("stratum,x11,x10,x01\na,1,\"8,900\",3\n"), ParseError);
}

TEST(ParseCsv, WrongFieldCount) {
  EXPECT_THROW(parse_survey_csv("stratum,x11,x10,x01\na,1,2\n"), ParseError);
}

TEST(ParseJson, ReadsStrata) {
  const auto rows = parse_survey_json(
      R"({"strata":[{"label":"a","x11":1,"x10":2,"x01":3},{"label":"b","x11":4,"x10":5,"x01":6}]})");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].label, "a");
  EXPECT_EQ(rows[1].x10, 5);
}

TEST(ParseJson, MissingCountNamesField) {
  try {
    parse_survey_json(R"({"strata":[{"label":"a","x11":1,"x10":2}]})", "in.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "strata[0].x01");
  }
}

TEST(ParseJson, FractionalCountRejected) {
  EXPECT_THROW(parse_survey_json(R"({"strata":[{"x11":1.5,"x10":2,"x01":3}]})"), ParseError);
}

TEST(ParseJson, MalformedDocument) {
  EXPECT_THROW(parse_survey_json("{\"strata\": ["), ParseError);
  EXPECT_THROW(parse_survey_json("[1,2]"), ParseError);
}

TEST(ReadSurvey, ShippedQuarters) {
  for (int q = 1; q <= 4; ++q) {
    const SurveyData d = read_survey(testing::data_path("2018_q" + std::to_string(q) + ".csv"));
    EXPECT_EQ(d.counts_a(), testing::kQuarters[q - 1][0]);
    EXPECT_EQ(d.counts_b(), testing::kQuarters[q - 1][1]);
  }
}

TEST(ReadSurvey, JsonByExtensionAndThreeStrataRejected) {
  const auto dir = std::filesystem::temp_directory_path() / "depdse_io_test";
  std::filesystem::create_directories(dir);
  const auto ok = dir / "two.json";
  std::ofstream(ok) << R"({"strata":[{"label":"a","x11":1,"x10":2,"x01":3},)"
                    << R"({"label":"b","x11":4,"x10":5,"x01":6}]})";
  EXPECT_EQ(read_survey(ok).counts_b(), (CellCounts{4, 5, 6}));

  const auto bad = dir / "three.csv";
  std::ofstream(bad) << "stratum,x11,x10,x01\na,1,1,1\nb,1,1,1\nc,1,1,1\n";
  EXPECT_THROW(read_survey(bad), ValidationError);
  EXPECT_THROW(read_survey(dir / "missing.csv"), ParseError);
}

}  // namespace
}  // namespace depdse
