// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "depdse/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Cholesky>
#include <boost/math/distributions/normal.hpp>

#include "depdse/parallel.hpp"

namespace depdse {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint32_t kBootstrapStream = 0xB0075u;
}  // namespace

HessianSE se_from_hessian(const FitResult& fit, const SurveyData& data) {
  const Matrix6 info = -hessian(fit.params, data);
  std::vector<int> free;
  HessianSE out;
  for (Param p : kAllParams) {
    if (fit.is_active(p)) {
      out.fixed_at_bound.push_back(p);
    } else {
      free.push_back(index(p));
    }
  }
  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd sub(nf, nf);
  for (Eigen::Index i = 0; i < nf; ++i) {
    for (Eigen::Index j = 0; j < nf; ++j) sub(i, j) = info(free[i], free[j]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) {
    throw InferenceError(
        "observed information is singular or indefinite at the fitted "
        "point; use the bootstrap for standard errors");
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(nf, nf));
  if (!cov.allFinite() || (cov.diagonal().array() <= 0.0).any()) {
    throw InferenceError(
        "observed information could not be inverted; use the bootstrap for "
        "standard errors");
  }
  out.se.setConstant(kNaN);
  out.covariance.setZero();
  for (Eigen::Index i = 0; i < nf; ++i) {
    out.se[free[i]] = std::sqrt(cov(i, i));
    for (Eigen::Index j = 0; j < nf; ++j) {
      out.covariance(free[i], free[j]) = cov(i, j);
    }
  }
  const double var_a = out.covariance(index(Param::kNA), index(Param::kNA));
  const double var_b = out.covariance(index(Param::kNB), index(Param::kNB));
  const double cov_ab = out.covariance(index(Param::kNA), index(Param::kNB));
  out.se_total = std::sqrt(var_a + var_b);
  // The strata share alpha and p1, so the estimates are in fact correlated.
  out.se_total_correlated = std::sqrt(std::max(0.0, var_a + var_b + 2.0 * cov_ab));
  return out;
}

std::string_view quantity_name(Quantity q) noexcept {
  switch (q) {
    case Quantity::kNA: return "N_A";
    case Quantity::kNB: return "N_B";
    case Quantity::kTotal: return "N";
    case Quantity::kAlpha: return "alpha";
    case Quantity::kP1: return "p1";
    case Quantity::kP2A: return "p2A";
    case Quantity::kP2B: return "p2B";
  }
  return "?";
}

double quantity_of(const ModelParams& p, Quantity q) noexcept {
  switch (q) {
    case Quantity::kNA: return p.n_a;
    case Quantity::kNB: return p.n_b;
    case Quantity::kTotal: return p.n_a + p.n_b;
    case Quantity::kAlpha: return p.alpha;
    case Quantity::kP1: return p.p1;
    case Quantity::kP2A: return p.p2a;
    case Quantity::kP2B: return p.p2b;
  }
  return kNaN;
}

BootstrapError::BootstrapError(const std::string& message,
                               BootstrapResult partial)
    : Error(message), partial_(std::move(partial)) {}

std::array<std::int64_t, 4> draw_imputed_table(PhiloxEngine& engine,
                                               const CellCounts& counts,
                                               double n_hat) {
  const double x0 = static_cast<double>(counts.observed());
  if (!(n_hat >= x0)) {
    throw DomainError("imputed table: fitted size below observed total");
  }
  const std::array<double, 4> probs = {
      static_cast<double>(counts.x11) / n_hat,
      static_cast<double>(counts.x10) / n_hat,
      static_cast<double>(counts.x01) / n_hat, (n_hat - x0) / n_hat};
  return draw_multinomial(engine, std::llround(n_hat), probs);
}

BootstrapResult bootstrap(const SurveyData& data, const FitResult& fit,
                          const BootstrapOptions& options) {
  if (options.replicates < 1) throw DomainError("bootstrap: B must be >= 1");
  options.fit.check();
  const auto count = static_cast<std::size_t>(options.replicates);

  struct Slot {
    QuantityVector values{};
    bool ok = false;
    int retries = 0;
    std::string failure;
  };
  std::vector<Slot> slots(count);

  parallel_for(count, options.threads, [&](std::size_t b) {
    Slot& slot = slots[b];
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
      PhiloxEngine engine(options.seed,
                          stream_id(kBootstrapStream, static_cast<std::uint32_t>(b)),
                          static_cast<std::uint32_t>(attempt));
      const auto ta = draw_imputed_table(engine, data.counts_a(), fit.params.n_a);
      const auto tb = draw_imputed_table(engine, data.counts_b(), fit.params.n_b);
      const std::array<RawStratum, 2> raw = {
          RawStratum{data.a.label, ta[0], ta[1], ta[2]},
          RawStratum{data.b.label, tb[0], tb[1], tb[2]}};
      try {
        const SurveyData star = validate(raw);
        const FitResult refit = depdse::fit(star, options.fit);
        for (Quantity q : kAllQuantities) {
          slot.values[static_cast<int>(q)] = quantity_of(refit.params, q);
        }
        slot.ok = true;
        return;
      } catch (const Error& e) {
        slot.failure = e.what();
        if (attempt < options.max_retries) ++slot.retries;
      }
    }
  });

  BootstrapResult out;
  out.requested = options.replicates;
  out.replicates.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    const Slot& s = slots[b];
    out.retries += s.retries;
    if (s.ok) {
      out.replicates.push_back(s.values);
      ++out.successful;
    } else {
      QuantityVector nan;
      nan.fill(kNaN);
      out.replicates.push_back(nan);
      ++out.failed;
      out.failure_log.push_back("replicate " + std::to_string(b) + ": " +
                                s.failure);
    }
  }
  out.mean.fill(kNaN);
  out.se.fill(kNaN);
  if (out.successful > 0) {
    for (int q = 0; q < kNumQuantities; ++q) {
      double sum = 0.0;
      for (const auto& row : out.replicates) {
        if (!std::isnan(row[q])) sum += row[q];
      }
      const double mean = sum / out.successful;
      double ss = 0.0;
      for (const auto& row : out.replicates) {
        if (!std::isnan(row[q])) ss += (row[q] - mean) * (row[q] - mean);
      }
      out.mean[q] = mean;
      out.se[q] = std::sqrt(ss / out.successful);
    }
  }
  if (out.failed > options.max_failure_fraction * options.replicates) {
    const std::string msg =
        "bootstrap aborted: " + std::to_string(out.failed) + " of " +
        std::to_string(out.requested) + " replicates failed";
    throw BootstrapError(msg, std::move(out));
  }
  return out;
}

double normal_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1)");
  }
  if (level == 0.95) return 1.96;
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 1.0 - (1.0 - level) / 2.0);
}

Interval lognormal_interval(double n_hat, double x0, double sigma2,
                            double level) {
  if (!(n_hat > x0)) {
    throw DomainError("log-normal interval requires N > x0");
  }
  if (!(sigma2 >= 0.0)) throw DomainError("variance must be >= 0");
  const double z = normal_quantile(level);
  const double excess = n_hat - x0;
  const double c =
      std::exp(z * std::sqrt(std::log1p(sigma2 / (excess * excess))));
  return {x0 + excess / c, x0 + excess * c};
}

Interval wald_interval(double n_hat, double sigma2, double level) {
  if (!(sigma2 >= 0.0)) throw DomainError("variance must be >= 0");
  const double half = normal_quantile(level) * std::sqrt(sigma2);
  return {n_hat - half, n_hat + half};
}

std::string_view to_string(SeMethod m) noexcept {
  switch (m) {
    case SeMethod::kHessian: return "hessian";
    case SeMethod::kBootstrap: return "bootstrap";
    case SeMethod::kBoth: return "both";
  }
  return "?";
}

SeMethod parse_se_method(std::string_view name) {
  if (name == "hessian") return SeMethod::kHessian;
  if (name == "bootstrap") return SeMethod::kBootstrap;
  if (name == "both") return SeMethod::kBoth;
  throw DomainError("unknown SE method '" + std::string(name) + "'");
}

VarianceIntervals size_intervals(const FitResult& fit, const SurveyData& data,
                                 double var_a, double var_b, double var_total,
                                 double level) {
  const double x0a = static_cast<double>(data.counts_a().observed());
  const double x0b = static_cast<double>(data.counts_b().observed());
  const ModelParams& p = fit.params;
  VarianceIntervals out;
  out.lognormal.n_a = lognormal_interval(p.n_a, x0a, var_a, level);
  out.lognormal.n_b = lognormal_interval(p.n_b, x0b, var_b, level);
  out.lognormal.total = lognormal_interval(p.total(), x0a + x0b, var_total, level);
  out.wald.n_a = wald_interval(p.n_a, var_a, level);
  out.wald.n_b = wald_interval(p.n_b, var_b, level);
  out.wald.total = wald_interval(p.total(), var_total, level);
  return out;
}

UncertaintyReport assess_uncertainty(const SurveyData& data,
                                     const FitResult& fit, SeMethod method,
                                     const BootstrapOptions& options,
                                     double level) {
  UncertaintyReport report;
  report.level = level;
  report.method = method;
  if (method != SeMethod::kBootstrap) {
    try {
      report.hessian = se_from_hessian(fit, data);
      const HessianSE& h = *report.hessian;
      const double va = h.covariance(index(Param::kNA), index(Param::kNA));
      const double vb = h.covariance(index(Param::kNB), index(Param::kNB));
      report.hessian_intervals =
          size_intervals(fit, data, va, vb, h.se_total * h.se_total, level);
    } catch (const InferenceError& e) {
      if (method == SeMethod::kHessian) throw;
      report.hessian_error = e.what();
    }
  }
  if (method != SeMethod::kHessian) {
    report.bootstrap = bootstrap(data, fit, options);
    const BootstrapResult& b = *report.bootstrap;
    auto var = [&](Quantity q) { return b.se_of(q) * b.se_of(q); };
    report.bootstrap_intervals =
        size_intervals(fit, data, var(Quantity::kNA), var(Quantity::kNB),
                       var(Quantity::kTotal), level);
  }
  return report;
}

}  // namespace depdse
