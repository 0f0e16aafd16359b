// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli/report.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace depdse::cli {

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json to_json(const CellCounts& c) {
  return Json{{"x11", c.x11}, {"x10", c.x10}, {"x01", c.x01}};
}

Json to_json(const ModelParams& p) {
  Json j = Json::object();
  for (Param q : kAllParams) j[std::string(param_name(q))] = number(p[q]);
  j["N"] = number(p.total());
  return j;
}

Json to_json(const StartDiagnostics& s) {
  return Json{{"start", to_json(s.start)},
              {"end", to_json(s.end)},
              {"start_log_likelihood", number(s.start_log_likelihood)},
              {"log_likelihood", number(s.log_likelihood)},
              {"converged", s.converged},
              {"iterations", s.iterations},
              {"projected_gradient_norm", number(s.projected_gradient_norm)},
              {"message", s.message}};
}

Json to_json(const FitResult& f) {
  Json active = Json::array();
  for (Param p : f.active_constraints) active.push_back(param_name(p));
  Json starts = Json::array();
  for (const auto& s : f.per_start) starts.push_back(to_json(s));
  return Json{{"mode", to_string(f.mode)},
              {"params", to_json(f.params)},
              {"log_likelihood", number(f.log_likelihood)},
              {"converged", f.converged},
              {"iterations", f.iterations},
              {"projected_gradient_norm", number(f.projected_gradient_norm)},
              {"active_constraints", active},
              {"best_start", f.best_start},
              {"identification_discrepancy", number(f.identification_discrepancy)},
              {"reduced_fallback", f.reduced_fallback},
              {"starts", starts}};
}

Json to_json(const HessianSE& h) {
  Json se = Json::object();
  for (Param p : kAllParams) se[std::string(param_name(p))] = number(h.se_of(p));
  se["N"] = number(h.se_total);
  se["N_with_covariance"] = number(h.se_total_correlated);
  Json cov = Json::array();
  for (int i = 0; i < kNumParams; ++i) {
    Json row = Json::array();
    for (int j = 0; j < kNumParams; ++j) row.push_back(number(h.covariance(i, j)));
    cov.push_back(row);
  }
  Json fixed = Json::array();
  for (Param p : h.fixed_at_bound) fixed.push_back(param_name(p));
  return Json{{"se", se}, {"covariance", cov}, {"fixed_at_bound", fixed}};
}

Json to_json(const BootstrapResult& b) {
  Json mean = Json::object();
  Json se = Json::object();
  for (Quantity q : kAllQuantities) {
    mean[std::string(quantity_name(q))] = number(b.mean_of(q));
    se[std::string(quantity_name(q))] = number(b.se_of(q));
  }
  Json columns = Json::array();
  for (Quantity q : kAllQuantities) columns.push_back(quantity_name(q));
  Json reps = Json::array();
  for (const auto& row : b.replicates) {
    Json r = Json::array();
    for (double v : row) r.push_back(number(v));
    reps.push_back(r);
  }
  return Json{{"requested", b.requested},
              {"successful", b.successful},
              {"failed", b.failed},
              {"retries", b.retries},
              {"mean", mean},
              {"se", se},
              {"failure_log", b.failure_log},
              {"columns", columns},
              {"replicates", reps}};
}

Json to_json(const Interval& i) {
  return Json{{"lower", number(i.lower)}, {"upper", number(i.upper)}};
}

Json to_json(const SizeIntervals& s) {
  return Json{{"N_A", to_json(s.n_a)}, {"N_B", to_json(s.n_b)}, {"N", to_json(s.total)}};
}

Json to_json(const VarianceIntervals& v) {
  return Json{{"lognormal", to_json(v.lognormal)}, {"standard", to_json(v.wald)}};
}

Json to_json(const Diagnostics& d) {
  Json strata = Json::array();
  for (const auto& s : d.strata) {
    strata.push_back({{"label", s.label},
                      {"c_hat", number(s.c_hat)},
                      {"p_hat", number(s.p_hat)},
                      {"p_hat_population", number(s.p_hat_population)},
                      {"naive", s.naive ? number(*s.naive) : Json(nullptr)},
                      {"x11_zero", !s.naive.has_value()}});
  }
  return Json{{"strata", strata},
              {"naive_pooled", d.naive_pooled ? number(*d.naive_pooled) : Json(nullptr)}};
}

Json to_json(const GeneratorConfig& c) {
  auto stratum = [](const StratumConfig& s) {
    return Json{{"population", s.population}, {"p1", s.p1}, {"p2", s.p2}};
  };
  return Json{{"A", stratum(c.a)},
              {"B", stratum(c.b)},
              {"alpha", c.alpha},
              {"dependence", to_string(c.dependence)},
              {"replicates", c.replicates},
              {"seed", c.seed}};
}

Json to_json(const SummaryRow& r) {
  return Json{{"quantity", r.quantity},
              {"truth", number(r.truth)},
              {"expected", number(r.expected)},
              {"bias", number(r.bias)},
              {"relative_bias_pct", number(r.relative_bias_pct)},
              {"bias_over_truth_pct", number(r.bias_over_truth_pct)},
              {"variance", number(r.variance)},
              {"cv_pct", number(r.cv_pct)},
              {"rmse", number(r.rmse)},
              {"bias_within_mc_error", r.bias_within_mc_error},
              {"replicates", r.replicates},
              {"failures", r.failures}};
}

Json to_json(const CoverageRow& r) {
  return Json{{"quantity", r.quantity},
              {"interval", r.interval},
              {"mean_lower", number(r.mean_lower)},
              {"mean_upper", number(r.mean_upper)},
              {"coverage", number(r.coverage)},
              {"replicates", r.replicates}};
}

Json to_json(const FitOptions& o) {
  return Json{{"mode", to_string(o.mode)},
              {"max_iterations", o.max_iterations},
              {"gradient_tolerance", o.gradient_tolerance},
              {"starts", o.n_starts},
              {"seed", o.seed}};
}

CsvWriter::CsvWriter(const std::vector<std::string>& header)
    : columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
  rows_ = 0;
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (filled_ == columns_) throw std::logic_error("csv row overflow");
  if (filled_ > 0) text_ += ',';
  if (s.find_first_of(",\"\n") != std::string::npos) {
    text_ += '"';
    for (char c : s) {
      if (c == '"') text_ += '"';
      text_ += c;
    }
    text_ += '"';
  } else {
    text_ += s;
  }
  ++filled_;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) {
  return cell(std::isfinite(v) ? fmt::format("{}", v) : std::string());
}

CsvWriter& CsvWriter::cell(long long v) { return cell(fmt::format("{}", v)); }

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("csv row has missing cells");
  text_ += '\n';
  filled_ = 0;
  ++rows_;
}

}  // namespace depdse::cli
