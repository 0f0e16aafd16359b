// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "depdse/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "box_newton.hpp"
#include "depdse/random.hpp"

namespace depdse {

std::string_view to_string(FitMode mode) noexcept {
  return mode == FitMode::kReduced ? "reduced" : "full";
}

FitMode parse_fit_mode(std::string_view name) {
  if (name == "reduced") return FitMode::kReduced;
  if (name == "full") return FitMode::kFull;
  throw DomainError("unknown fit mode '" + std::string(name) + "'");
}

void FitOptions::check() const {
  if (!(gradient_tolerance > 0.0)) {
    throw DomainError("gradient_tolerance must be > 0");
  }
  if (n_starts < 1) throw DomainError("n_starts must be >= 1");
  if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
}

bool FitResult::is_active(Param p) const noexcept {
  return std::find(active_constraints.begin(), active_constraints.end(), p) !=
         active_constraints.end();
}

FitError::FitError(Kind kind, const std::string& message,
                   std::vector<StartDiagnostics> diagnostics)
    : Error(message), kind_(kind), diagnostics_(std::move(diagnostics)) {}

SizeBounds size_bounds(const SurveyData& data) {
  const CellCounts& a = data.counts_a();
  const CellCounts& b = data.counts_b();
  if (a.x11 < 1) {
    throw FitError(FitError::Kind::kUnfittable,
                   "unfittable: x11A = 0, naive upper bound undefined");
  }
  if (b.x11 < 1) {
    throw FitError(FitError::Kind::kUnfittable,
                   "unfittable: x11B = 0, naive upper bound undefined");
  }
  return {static_cast<double>(a.observed()), naive_estimate(a),
          static_cast<double>(b.observed()), naive_estimate(b)};
}

namespace {

constexpr double kStartMargin = 1e-4;
constexpr double kTieTolerance = 1e-9;
constexpr std::array<double, 4> kAlphaGrid = {0.05, 0.02, 0.10, 0.20};

// Sizes stay a hair above x0 so that log(N - x0) exists.
double lift_above(double x0) { return x0 + 1e-10 * std::max(1.0, x0); }

// Optimisation coordinates and their box for one fit mode.
class Problem {
 public:
  Problem(const SurveyData& data, FitMode mode)
      : data_(data), mode_(mode), sizes_(size_bounds(data)) {
    ratios_ = identification_ratios(data);
    if (mode_ == FitMode::kReduced) {
      const double r = ratios_.size_ratio;
      double lo = lift_above(std::max(sizes_.lower_b, sizes_.lower_a / r));
      while (r * lo <= sizes_.lower_a) {
        lo = std::nextafter(lo, std::numeric_limits<double>::infinity());
      }
      double hi = std::min(sizes_.upper_b, sizes_.upper_a / r);
      while (r * hi > sizes_.upper_a) {
        hi = std::nextafter(hi, -std::numeric_limits<double>::infinity());
      }
      if (!(lo < hi)) {
        throw FitError(FitError::Kind::kUnfittable,
                       "unfittable: reduced-mode size box is empty "
                       "(x0 and naive bounds incompatible with x1.A/x1.B)");
      }
      double p2_hi = std::min(1.0, 1.0 / ratios_.p2_ratio);
      while (ratios_.p2_ratio * p2_hi > 1.0) {
        p2_hi = std::nextafter(p2_hi, 0.0);
      }
      lower_ = Eigen::Vector4d(lo, 0.0, 0.0, 0.0);
      upper_ = Eigen::Vector4d(hi, 1.0, 1.0, p2_hi);
    } else {
      lower_.resize(kNumParams);
      upper_.resize(kNumParams);
      lower_ << lift_above(sizes_.lower_a), lift_above(sizes_.lower_b), 0.0,
          0.0, 0.0, 0.0;
      upper_ << sizes_.upper_a, sizes_.upper_b, 1.0, 1.0, 1.0, 1.0;
    }
  }

  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const SizeBounds& sizes() const { return sizes_; }
  const IdentificationRatios& ratios() const { return ratios_; }
  FitMode mode() const { return mode_; }

  ModelParams natural(const Eigen::VectorXd& x) const {
    if (mode_ == FitMode::kFull) {
      return ModelParams::from_vector(Vector6(x));
    }
    return expand(ReducedParams{x[0], x[1], x[2], x[3]}, data_).params;
  }

  Eigen::VectorXd coords(const ModelParams& p) const {
    if (mode_ == FitMode::kFull) return p.to_vector();
    return Eigen::Vector4d(p.n_b, p.alpha, p.p1, p.p2b);
  }

  double value(const Eigen::VectorXd& x) const {
    return log_likelihood_or_ninf(natural(x), data_);
  }

  void derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& g,
                   Eigen::MatrixXd& h) const {
    const ModelParams p = natural(x);
    const Vector6 g6 = gradient(p, data_);
    const Matrix6 h6 = hessian(p, data_);
    if (mode_ == FitMode::kFull) {
      g = g6;
      h = h6;
      return;
    }
    Eigen::Matrix<double, kNumParams, 4> jac =
        Eigen::Matrix<double, kNumParams, 4>::Zero();
    jac(index(Param::kNA), 0) = ratios_.size_ratio;
    jac(index(Param::kNB), 0) = 1.0;
    jac(index(Param::kAlpha), 1) = 1.0;
    jac(index(Param::kP1), 2) = 1.0;
    jac(index(Param::kP2A), 3) = ratios_.p2_ratio;
    jac(index(Param::kP2B), 3) = 1.0;
    g = jac.transpose() * g6;
    h = jac.transpose() * h6 * jac;
    h = 0.5 * (h + h.transpose()).eval();
  }

 private:
  const SurveyData& data_;
  FitMode mode_;
  SizeBounds sizes_;
  IdentificationRatios ratios_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

// N_B interval implied by mapping the N_A box through the size ratio.
std::pair<double, double> reduced_nb_interval(const SizeBounds& s, double r) {
  return {std::max(s.lower_b, s.lower_a / r), std::min(s.upper_b, s.upper_a / r)};
}

// Start with both sizes chosen freely; used when the reduced box is empty.
ModelParams free_start(const SurveyData& data, double n_a, double n_b,
                       double alpha) {
  const CellCounts& a = data.counts_a();
  const CellCounts& b = data.counts_b();
  ModelParams p;
  p.n_a = n_a;
  p.n_b = n_b;
  p.alpha = alpha;
  p.p1 = std::clamp(static_cast<double>(a.list1() + b.list1()) / (n_a + n_b),
                    kStartMargin, 1.0 - kStartMargin);
  auto p2 = [&](const CellCounts& c, double n) {
    return std::clamp(static_cast<double>(c.x11) / (n * (1.0 - alpha) * p.p1),
                      kStartMargin, 1.0 - kStartMargin);
  };
  p.p2a = p2(a, n_a);
  p.p2b = p2(b, n_b);
  return p;
}

// Reduced-coordinate start for a given N_B and alpha.
ModelParams seeded_start(const SizeBounds& s, const IdentificationRatios& ratios,
                         const SurveyData& data, double n_b, double alpha) {
  // Reduced box bounds for N_B, regardless of the fit mode.
  const double r = ratios.size_ratio;
  const auto [nb_lo, nb_hi] = reduced_nb_interval(s, r);
  const double span = nb_hi - nb_lo;
  n_b = std::clamp(n_b, nb_lo + kStartMargin * span, nb_hi - kStartMargin * span);

  const CellCounts& a = data.counts_a();
  const CellCounts& b = data.counts_b();
  const double n_a = r * n_b;
  double p1 = static_cast<double>(a.list1() + b.list1()) / (n_a + n_b);
  p1 = std::clamp(p1, kStartMargin, 1.0 - kStartMargin);
  double p2_hi = std::min(1.0, 1.0 / ratios.p2_ratio);
  double p2b = static_cast<double>(b.x11) / (n_b * (1.0 - alpha) * p1);
  p2b = std::clamp(p2b, kStartMargin, p2_hi - kStartMargin);

  ModelParams p = expand(ReducedParams{n_b, alpha, p1, p2b}, data).params;
  p.p2a = std::clamp(p.p2a, kStartMargin, 1.0 - kStartMargin);
  return p;
}

std::vector<Param> active_set(const ModelParams& p, const SizeBounds& s) {
  std::vector<Param> out;
  auto near = [](double v, double bound, double range) {
    return std::abs(v - bound) <= 1e-9 * std::max(1.0, range);
  };
  const double range_a = s.upper_a - s.lower_a;
  const double range_b = s.upper_b - s.lower_b;
  if (near(p.n_a, s.lower_a, range_a) || near(p.n_a, s.upper_a, range_a)) {
    out.push_back(Param::kNA);
  }
  if (near(p.n_b, s.lower_b, range_b) || near(p.n_b, s.upper_b, range_b)) {
    out.push_back(Param::kNB);
  }
  for (Param q : {Param::kAlpha, Param::kP1, Param::kP2A, Param::kP2B}) {
    if (near(p[q], 0.0, 1.0) || near(p[q], 1.0, 1.0)) out.push_back(q);
  }
  return out;
}

}  // namespace

std::vector<ModelParams> starting_points(const SurveyData& data,
                                         const FitOptions& options) {
  options.check();
  const SizeBounds s = size_bounds(data);
  const IdentificationRatios ratios = identification_ratios(data);
  const auto [nb_lo, nb_hi] = reduced_nb_interval(s, ratios.size_ratio);
  const std::array<double, 3> levels = {0.5 * (nb_lo + nb_hi), 1.2 * nb_lo,
                                        0.8 * nb_hi};

  std::vector<ModelParams> starts;
  const auto n = static_cast<std::size_t>(options.n_starts);
  starts.reserve(n);
  if (!(nb_lo < nb_hi)) {
    // No point satisfies both the size box and the ratio: place each
    // stratum's size on its own box instead (full mode only).
    auto level = [&](double lo, double hi, std::size_t k) {
      const double v = k == 0 ? 0.5 * (lo + hi) : (k == 1 ? 1.2 * lo : 0.8 * hi);
      const double span = hi - lo;
      return std::clamp(v, lo + kStartMargin * span, hi - kStartMargin * span);
    };
    PhiloxEngine engine(options.seed, stream_id(0x57A27u, 1));
    for (std::size_t i = 0; i < n; ++i) {
      double fa = 0.0, fb = 0.0, alpha = 0.0;
      if (i < levels.size() * kAlphaGrid.size()) {
        const std::size_t k = i % levels.size();
        fa = level(s.lower_a, s.upper_a, k);
        fb = level(s.lower_b, s.upper_b, k);
        alpha = kAlphaGrid[i / levels.size()];
      } else {
        fa = level(s.lower_a, s.upper_a, 0) +
             (engine.uniform() - 0.5) * (1.0 - 2.0 * kStartMargin) * (s.upper_a - s.lower_a);
        fb = level(s.lower_b, s.upper_b, 0) +
             (engine.uniform() - 0.5) * (1.0 - 2.0 * kStartMargin) * (s.upper_b - s.lower_b);
        alpha = 0.005 + 0.495 * engine.uniform();
      }
      starts.push_back(free_start(data, fa, fb, alpha));
    }
    return starts;
  }
  for (std::size_t i = 0; i < n && i < levels.size() * kAlphaGrid.size(); ++i) {
    starts.push_back(seeded_start(s, ratios, data, levels[i % levels.size()],
                                  kAlphaGrid[i / levels.size()]));
  }
  PhiloxEngine engine(options.seed, stream_id(0x57A27u, 0));
  while (starts.size() < n) {
    const double n_b = nb_lo + (nb_hi - nb_lo) * engine.uniform();
    const double alpha = 0.005 + 0.495 * engine.uniform();
    starts.push_back(seeded_start(s, ratios, data, n_b, alpha));
  }
  return starts;
}

FitResult fit_from(const SurveyData& data, const FitOptions& options,
                   std::span<const ModelParams> starts) {
  options.check();
  if (starts.empty()) throw DomainError("fit_from: no starting points");
  const Problem problem(data, options.mode);

  detail::BoxProblem box;
  box.lower = problem.lower();
  box.upper = problem.upper();
  box.value = [&](const Eigen::VectorXd& x) { return problem.value(x); };
  box.derivatives = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g,
                        Eigen::MatrixXd& h) { problem.derivatives(x, g, h); };
  const detail::BoxNewtonOptions newton{options.max_iterations,
                                        options.gradient_tolerance};

  std::vector<StartDiagnostics> diags;
  std::vector<detail::BoxNewtonResult> runs;
  diags.reserve(starts.size());
  runs.reserve(starts.size());
  for (const ModelParams& start : starts) {
    const Eigen::VectorXd x0 = problem.coords(start);
    detail::BoxNewtonResult run = detail::maximize_box_newton(box, x0, newton);
    StartDiagnostics d;
    d.start = start;
    d.start_log_likelihood = problem.value(
        x0.cwiseMax(problem.lower()).cwiseMin(problem.upper()));
    d.end = problem.natural(run.x);
    d.log_likelihood = run.value;
    d.converged = run.converged;
    d.iterations = run.iterations;
    d.projected_gradient_norm = run.projected_gradient_norm;
    d.message = run.message;
    diags.push_back(std::move(d));
    runs.push_back(std::move(run));
  }

  std::size_t best = diags.size();
  for (std::size_t i = 0; i < diags.size(); ++i) {
    if (!diags[i].converged) continue;
    if (best == diags.size()) {
      best = i;
      continue;
    }
    const double diff = diags[i].log_likelihood - diags[best].log_likelihood;
    if (diff > kTieTolerance ||
        (std::abs(diff) <= kTieTolerance &&
         diags[i].end.total() < diags[best].end.total())) {
      best = i;
    }
  }
  if (best == diags.size()) {
    const std::string msg = "no starting point converged (" +
                            std::to_string(diags.size()) + " tried)";
    throw FitError(FitError::Kind::kNonConvergence, msg, std::move(diags));
  }

  FitResult out;
  out.mode = options.mode;
  out.params = diags[best].end;
  out.log_likelihood = log_likelihood(out.params, data);
  out.converged = true;
  out.iterations = diags[best].iterations;
  out.projected_gradient_norm = diags[best].projected_gradient_norm;
  out.best_start = best;
  out.n_hat_total = out.params.total();
  out.active_constraints = active_set(out.params, problem.sizes());
  const IdentificationRatios& r = problem.ratios();
  const double size_dev =
      std::abs(out.params.n_a / (r.size_ratio * out.params.n_b) - 1.0);
  const double p2_dev =
      out.params.p2b > 0.0
          ? std::abs(out.params.p2a / (r.p2_ratio * out.params.p2b) - 1.0)
          : 0.0;
  out.identification_discrepancy = std::max(size_dev, p2_dev);
  out.per_start = std::move(diags);
  return out;
}

FitResult fit(const SurveyData& data, const FitOptions& options) {
  const SizeBounds s = size_bounds(data);  // rejects x11 = 0 before building starts
  if (options.mode == FitMode::kReduced) {
    const auto [lo, hi] =
        reduced_nb_interval(s, identification_ratios(data).size_ratio);
    if (!(lo < hi)) {
      FitOptions full = options;
      full.mode = FitMode::kFull;
      FitResult out = fit_from(data, full, starting_points(data, full));
      out.reduced_fallback = true;
      return out;
    }
  }
  const std::vector<ModelParams> starts = starting_points(data, options);
  return fit_from(data, options, starts);
}

}  // namespace depdse
