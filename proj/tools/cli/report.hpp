// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// JSON and CSV encodings of library results.

#pragma once

#include <string>
#include <vector>

#include "cli/manifest.hpp"
#include "depdse/inference.hpp"
#include "depdse/mle.hpp"
#include "depdse/simulate.hpp"
#include "depdse/tables.hpp"

namespace depdse::cli {

/// NaN and infinities become null.
Json number(double v);

Json to_json(const CellCounts& c);
Json to_json(const ModelParams& p);
Json to_json(const StartDiagnostics& s);
Json to_json(const FitResult& f);
Json to_json(const HessianSE& h);
Json to_json(const BootstrapResult& b);
Json to_json(const Interval& i);
Json to_json(const SizeIntervals& s);
Json to_json(const VarianceIntervals& v);
Json to_json(const Diagnostics& d);
Json to_json(const GeneratorConfig& c);
Json to_json(const SummaryRow& r);
Json to_json(const CoverageRow& r);
Json to_json(const FitOptions& o);

/// Minimal RFC 4180 writer; doubles use the shortest round-trip form and
/// non-finite values are left empty.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);

  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(bool v) { return cell(std::string(v ? "true" : "false")); }
  CsvWriter& empty() { return cell(std::string()); }
  void end_row();

  std::size_t rows() const noexcept { return rows_; }
  const std::string& str() const noexcept { return text_; }

 private:
  std::size_t columns_;
  std::size_t filled_ = 0;
  std::size_t rows_ = 0;
  std::string text_;
};

}  // namespace depdse::cli
