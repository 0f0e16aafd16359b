// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "depdse/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "depdse/error.hpp"

namespace depdse {

std::string_view param_name(Param p) noexcept {
  switch (p) {
    case Param::kNA: return "N_A";
    case Param::kNB: return "N_B";
    case Param::kAlpha: return "alpha";
    case Param::kP1: return "p1";
    case Param::kP2A: return "p2A";
    case Param::kP2B: return "p2B";
  }
  return "?";
}

Vector6 ModelParams::to_vector() const {
  Vector6 v;
  v << n_a, n_b, alpha, p1, p2a, p2b;
  return v;
}

ModelParams ModelParams::from_vector(const Vector6& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

double& ModelParams::operator[](Param p) noexcept {
  switch (p) {
    case Param::kNA: return n_a;
    case Param::kNB: return n_b;
    case Param::kAlpha: return alpha;
    case Param::kP1: return p1;
    case Param::kP2A: return p2a;
    case Param::kP2B: break;
  }
  return p2b;
}

double ModelParams::operator[](Param p) const noexcept {
  return const_cast<ModelParams&>(*this)[p];
}

ModelParams ModelParams::swapped() const noexcept {
  return {n_b, n_a, alpha, p1, p2b, p2a};
}

namespace {

void check_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1], got " +
                      std::to_string(v));
  }
}

}  // namespace

CellProbabilities cell_probabilities(double alpha, double p1, double p2) {
  check_probability(alpha, "alpha");
  check_probability(p1, "p1");
  check_probability(p2, "p2");
  CellProbabilities c;
  c.p11 = (1.0 - alpha) * p1 * p2;
  c.p10 = p1 * (alpha + (1.0 - alpha) * (1.0 - p2));
  c.p01 = (1.0 - p1) * (alpha + (1.0 - alpha) * p2);
  c.p00 = (1.0 - alpha) * (1.0 - p1) * (1.0 - p2);
  return c;
}

MarginalsCovariance marginals_and_covariance(double alpha, double p1,
                                             double p2) {
  const CellProbabilities c = cell_probabilities(alpha, p1, p2);
  MarginalsCovariance m;
  m.p_y = c.p11 + c.p10;
  m.p_z = c.p11 + c.p01;
  m.cov = c.p11 - m.p_y * m.p_z;
  return m;
}

IdentificationRatios identification_ratios(const SurveyData& data) {
  const CellCounts& a = data.counts_a();
  const CellCounts& b = data.counts_b();
  if (b.list1() < 1) throw DomainError("size ratio undefined: x1.B = 0");
  if (b.x11 < 1) throw DomainError("p2A identity undefined: x11B = 0");
  IdentificationRatios r;
  r.size_ratio = static_cast<double>(a.list1()) / static_cast<double>(b.list1());
  r.p2_ratio = (static_cast<double>(a.x11) / static_cast<double>(b.x11)) *
               (static_cast<double>(b.list1()) / static_cast<double>(a.list1()));
  return r;
}

Expansion expand(const ReducedParams& reduced, const SurveyData& data) {
  const IdentificationRatios r = identification_ratios(data);
  Expansion e;
  e.params.n_a = r.size_ratio * reduced.n_b;
  e.params.n_b = reduced.n_b;
  e.params.alpha = reduced.alpha;
  e.params.p1 = reduced.p1;
  e.params.p2b = reduced.p2b;
  e.params.p2a = r.p2_ratio * reduced.p2b;
  if (e.params.p2a > 1.0) {
    e.params.p2a = 1.0;
    e.p2a_clamped = true;
  }
  return e;
}

ReducedParams restrict_to_reduced(const ModelParams& params) noexcept {
  return {params.n_b, params.alpha, params.p1, params.p2b};
}

namespace {

// Local coordinates of one stratum: (N, alpha, p1, p2).
using Vector4 = Eigen::Matrix<double, 4, 1>;
using Matrix4 = Eigen::Matrix<double, 4, 4>;

struct StratumView {
  double x11, x10, x01, x0;
  double n, alpha, p1, p2;
  char suffix;

  double m() const { return n - x0; }
  double a10() const { return alpha + (1.0 - alpha) * (1.0 - p2); }
  double a01() const { return alpha + (1.0 - alpha) * p2; }
};

StratumView view(const CellCounts& c, double n, double alpha, double p1,
                 double p2, char suffix) {
  return {static_cast<double>(c.x11), static_cast<double>(c.x10),
          static_cast<double>(c.x01), static_cast<double>(c.observed()),
          n,   alpha, p1, p2, suffix};
}

std::string term_name(const char* what, char suffix) {
  std::string s(what);
  for (auto& ch : s) {
    if (ch == '#') ch = suffix;
  }
  return s;
}

// coef * log(arg) with 0 * log(0) = 0. Returns false when undefined.
bool xlog(double coef, double arg, double& out) {
  if (coef == 0.0) {
    out = 0.0;
    return true;
  }
  if (!(arg > 0.0)) return false;
  out = coef * std::log(arg);
  return true;
}

// Value of one stratum's contribution; on failure `bad` names the term.
double stratum_value(const StratumView& s, const char*& bad) {
  const double m = s.m();
  if (!(m >= 0.0)) {
    bad = "N_# - x0#";
    return 0.0;
  }
  double total = 0.0;
  double t = 0.0;
  // n log n - n - (m log m - m)
  if (!xlog(s.n, s.n, t)) {
    bad = "N_# log N_#";
    return 0.0;
  }
  total += t - s.n;
  xlog(m, m, t);
  total -= t - m;

  const struct {
    double coef;
    double arg;
    const char* name;
  } terms[] = {
      {s.x11, (1.0 - s.alpha) * s.p1 * s.p2, "x11# log((1-alpha) p1 p2#)"},
      {s.x10, s.p1 * s.a10(), "x10# log(p1 (alpha + (1-alpha)(1-p2#)))"},
      {s.x01, (1.0 - s.p1) * s.a01(), "x01# log((1-p1)(alpha + (1-alpha) p2#))"},
      {m, (1.0 - s.alpha) * (1.0 - s.p1) * (1.0 - s.p2),
       "(N_# - x0#) log((1-alpha)(1-p1)(1-p2#))"},
  };
  for (const auto& term : terms) {
    if (!xlog(term.coef, term.arg, t)) {
      bad = term.name;
      return 0.0;
    }
    total += t;
  }
  return total;
}

// coef / x, guarding x == 0 with nonzero coef.
double ratio(double coef, double x, const char* name, char suffix) {
  if (coef == 0.0) return 0.0;
  if (x == 0.0) {
    throw EvaluationError(term_name(name, suffix),
                          "derivative undefined: zero denominator in " +
                              term_name(name, suffix));
  }
  return coef / x;
}

double checked_log(double x, const char* name, char suffix) {
  if (!(x > 0.0)) {
    throw EvaluationError(term_name(name, suffix),
                          "log of non-positive argument in " +
                              term_name(name, suffix));
  }
  return std::log(x);
}

Vector4 stratum_gradient(const StratumView& s) {
  const double m = s.m();
  const char c = s.suffix;
  if (!(m >= 0.0)) {
    throw EvaluationError(term_name("log(N_# - x0#)", c),
                          term_name("gradient requires N_# >= x0#", c));
  }
  const double a10 = s.a10();
  const double a01 = s.a01();
  Vector4 g;
  // At N = x0 the size derivative diverges; the rest stay finite.
  g[0] = m == 0.0 ? std::numeric_limits<double>::infinity()
                  : std::log(s.n) - std::log(m) +
                        checked_log((1.0 - s.alpha) * (1.0 - s.p1) * (1.0 - s.p2),
                                    "log((1-alpha)(1-p1)(1-p2#))", c);
  g[1] = -ratio(s.x11 + m, 1.0 - s.alpha, "(x11# + N_# - x0#)/(1-alpha)", c) +
         ratio(s.x10 * s.p2, a10, "x10# p2# / a10#", c) +
         ratio(s.x01 * (1.0 - s.p2), a01, "x01# (1-p2#) / a01#", c);
  g[2] = ratio(s.x11 + s.x10, s.p1, "(x11# + x10#)/p1", c) -
         ratio(s.x01 + m, 1.0 - s.p1, "(x01# + N_# - x0#)/(1-p1)", c);
  g[3] = ratio(s.x11, s.p2, "x11#/p2#", c) -
         ratio(s.x10 * (1.0 - s.alpha), a10, "x10# (1-alpha) / a10#", c) +
         ratio(s.x01 * (1.0 - s.alpha), a01, "x01# (1-alpha) / a01#", c) -
         ratio(m, 1.0 - s.p2, "(N_# - x0#)/(1-p2#)", c);
  return g;
}

Matrix4 stratum_hessian(const StratumView& s) {
  const double m = s.m();
  const char c = s.suffix;
  if (!(m > 0.0)) {
    throw EvaluationError(term_name("1/(N_# - x0#)", c),
                          term_name("Hessian requires N_# > x0#", c));
  }
  const double a10 = s.a10();
  const double a01 = s.a01();
  const double om_alpha = 1.0 - s.alpha;
  const double om_p1 = 1.0 - s.p1;
  const double om_p2 = 1.0 - s.p2;
  auto sq = [](double v) { return v * v; };

  Matrix4 h = Matrix4::Zero();
  h(0, 0) = 1.0 / s.n - 1.0 / m;
  h(0, 1) = -ratio(1.0, om_alpha, "1/(1-alpha)", c);
  h(0, 2) = -ratio(1.0, om_p1, "1/(1-p1)", c);
  h(0, 3) = -ratio(1.0, om_p2, "1/(1-p2#)", c);

  h(1, 1) = -ratio(s.x11 + m, sq(om_alpha), "(x11# + N_# - x0#)/(1-alpha)^2", c) -
            ratio(s.x10 * sq(s.p2), sq(a10), "x10# p2#^2 / a10#^2", c) -
            ratio(s.x01 * sq(om_p2), sq(a01), "x01# (1-p2#)^2 / a01#^2", c);
  h(1, 2) = 0.0;
  h(1, 3) = ratio(s.x10, sq(a10), "x10# / a10#^2", c) -
            ratio(s.x01, sq(a01), "x01# / a01#^2", c);

  h(2, 2) = -ratio(s.x11 + s.x10, sq(s.p1), "(x11# + x10#)/p1^2", c) -
            ratio(s.x01 + m, sq(om_p1), "(x01# + N_# - x0#)/(1-p1)^2", c);
  h(2, 3) = 0.0;

  h(3, 3) = -ratio(s.x11, sq(s.p2), "x11#/p2#^2", c) -
            ratio(s.x10 * sq(om_alpha), sq(a10), "x10# (1-alpha)^2 / a10#^2", c) -
            ratio(s.x01 * sq(om_alpha), sq(a01), "x01# (1-alpha)^2 / a01#^2", c) -
            ratio(m, sq(om_p2), "(N_# - x0#)/(1-p2#)^2", c);

  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < i; ++j) h(i, j) = h(j, i);
  }
  return h;
}

std::array<StratumView, 2> views(const ModelParams& p, const SurveyData& d) {
  return {view(d.counts_a(), p.n_a, p.alpha, p.p1, p.p2a, 'A'),
          view(d.counts_b(), p.n_b, p.alpha, p.p1, p.p2b, 'B')};
}

// Global index of each local coordinate (N, alpha, p1, p2) per stratum.
constexpr std::array<std::array<int, 4>, 2> kScatter = {
    {{0, 2, 3, 4}, {1, 2, 3, 5}}};

}  // namespace

double log_likelihood(const ModelParams& params, const SurveyData& data) {
  double total = 0.0;
  for (const StratumView& s : views(params, data)) {
    const char* bad = nullptr;
    const double v = stratum_value(s, bad);
    if (bad != nullptr) {
      const std::string name = term_name(bad, s.suffix);
      throw EvaluationError(name, "log-likelihood undefined at term " + name);
    }
    total += v;
  }
  return total;
}

double log_likelihood_or_ninf(const ModelParams& params,
                              const SurveyData& data) noexcept {
  double total = 0.0;
  for (const StratumView& s : views(params, data)) {
    const char* bad = nullptr;
    const double v = stratum_value(s, bad);
    if (bad != nullptr) return -std::numeric_limits<double>::infinity();
    total += v;
  }
  return std::isfinite(total) ? total
                              : -std::numeric_limits<double>::infinity();
}

Vector6 gradient(const ModelParams& params, const SurveyData& data) {
  Vector6 g = Vector6::Zero();
  const auto vs = views(params, data);
  for (std::size_t k = 0; k < 2; ++k) {
    const Vector4 local = stratum_gradient(vs[k]);
    for (int i = 0; i < 4; ++i) g[kScatter[k][i]] += local[i];
  }
  return g;
}

Matrix6 hessian(const ModelParams& params, const SurveyData& data) {
  Matrix6 h = Matrix6::Zero();
  const auto vs = views(params, data);
  for (std::size_t k = 0; k < 2; ++k) {
    const Matrix4 local = stratum_hessian(vs[k]);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        h(kScatter[k][i], kScatter[k][j]) += local(i, j);
      }
    }
  }
  return h;
}

}  // namespace depdse
