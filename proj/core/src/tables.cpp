// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "depdse/tables.hpp"

#include <cmath>
#include <utility>

#include "depdse/error.hpp"

namespace depdse {

CellCounts operator*(Count k, const CellCounts& c) noexcept {
  return {k * c.x11, k * c.x10, k * c.x01};
}

namespace {

constexpr std::array<const char*, 2> kSuffix = {"A", "B"};

void collect_flags(SurveyData& data) {
  data.flags.clear();
  const std::array<const CellCounts*, 2> cells = {&data.a.counts,
                                                  &data.b.counts};
  for (std::size_t s = 0; s < 2; ++s) {
    if (cells[s]->x11 == 0) {
      data.flags.push_back(std::string("x11") + kSuffix[s] + " = 0");
    }
  }
}

}  // namespace

SurveyData SurveyData::swapped() const {
  SurveyData out{b, a, {}};
  collect_flags(out);
  return out;
}

SurveyData validate(std::span<const RawStratum> strata) {
  if (strata.size() != 2) {
    throw ValidationError("strata", "exactly two strata required, got " +
                                        std::to_string(strata.size()));
  }
  std::array<Stratum, 2> out;
  for (std::size_t s = 0; s < 2; ++s) {
    const RawStratum& raw = strata[s];
    const std::string sfx = kSuffix[s];
    const std::array<std::pair<const char*, std::int64_t>, 3> fields = {
        {{"x11", raw.x11}, {"x10", raw.x10}, {"x01", raw.x01}}};
    for (const auto& [name, value] : fields) {
      if (value < 0) {
        throw ValidationError(name + sfx, "negative count: " +
                                              std::string(name) + sfx + " = " +
                                              std::to_string(value));
      }
    }
    const CellCounts c{raw.x11, raw.x10, raw.x01};
    if (c.observed() < 1) {
      throw ValidationError("x0" + sfx,
                            "zero observed total in stratum " + sfx);
    }
    if (c.list1() < 1) {
      throw ValidationError("x1." + sfx,
                            "zero List-1 total (x11 + x10) in stratum " + sfx);
    }
    out[s].label = raw.label.empty() ? sfx : raw.label;
    out[s].counts = c;
  }
  SurveyData data{std::move(out[0]), std::move(out[1]), {}};
  collect_flags(data);
  return data;
}

SurveyData make_survey(const CellCounts& a, const CellCounts& b,
                       std::string label_a, std::string label_b) {
  const std::array<RawStratum, 2> raw = {
      RawStratum{std::move(label_a), a.x11, a.x10, a.x01},
      RawStratum{std::move(label_b), b.x11, b.x10, b.x01}};
  return validate(raw);
}

double c_hat(const CellCounts& counts) {
  if (counts.list1() <= 0) {
    throw DomainError("c_hat: x11 + x10 = 0");
  }
  return static_cast<double>(counts.x11) / static_cast<double>(counts.list1());
}

double p_hat(const CellCounts& counts, double population) {
  const double x0 = static_cast<double>(counts.observed());
  if (!(population >= x0)) {
    throw DomainError("p_hat: population below observed total");
  }
  const double unlisted = population - static_cast<double>(counts.list1());
  if (counts.x01 == 0) return 0.0;
  return static_cast<double>(counts.x01) / unlisted;
}

double naive_estimate(const CellCounts& counts) {
  if (counts.x11 < 1) {
    throw DomainError("naive estimator undefined: x11 = 0");
  }
  return static_cast<double>(counts.list1()) *
         static_cast<double>(counts.list2()) / static_cast<double>(counts.x11);
}

double lp_bias_approx(double population, double p1dot, double p, double phi) {
  if (!(phi > 0.0)) throw DomainError("lp_bias_approx: phi must be > 0");
  if (!(p > 0.0) || !(p < 1.0)) {
    throw DomainError("lp_bias_approx: p must lie in (0, 1)");
  }
  if (!(p1dot > 0.0) || p1dot > 1.0) {
    throw DomainError("lp_bias_approx: p1. must lie in (0, 1]");
  }
  const double miss1 = 1.0 - p1dot;
  const double lead = population * miss1 * (1.0 - phi) / phi;
  const double tail = (1.0 / phi) * miss1 * (1.0 - phi * p) / (p1dot * phi * p);
  return lead + tail;
}

Diagnostics diagnose(const SurveyData& data,
                     std::optional<std::array<double, 2>> populations) {
  Diagnostics out;
  const std::array<const Stratum*, 2> strata = {&data.a, &data.b};
  for (std::size_t s = 0; s < 2; ++s) {
    const CellCounts& c = strata[s]->counts;
    StratumDiagnostics& d = out.strata[s];
    d.label = strata[s]->label;
    d.c_hat = c_hat(c);
    if (c.x11 >= 1) d.naive = naive_estimate(c);
    if (populations) {
      d.p_hat_population = (*populations)[s];
    } else if (d.naive) {
      d.p_hat_population = *d.naive;
    }
    if (d.p_hat_population > 0.0) d.p_hat = p_hat(c, d.p_hat_population);
  }
  if (data.pooled().x11 >= 1) out.naive_pooled = naive_estimate(data.pooled());
  return out;
}

}  // namespace depdse
