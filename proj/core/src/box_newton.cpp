// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "box_newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

#include "depdse/error.hpp"

namespace depdse::detail {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr double kNoiseUlps = 64.0;

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// A bound counts as binding when the variable sits within `eps` of it and
// the gradient points outward.
std::vector<bool> binding_set(const Eigen::VectorXd& x,
                              const Eigen::VectorXd& g,
                              const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi,
                              const Eigen::VectorXd& eps) {
  std::vector<bool> bound(static_cast<std::size_t>(x.size()), false);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (x[i] - lo[i] <= eps[i] && g[i] < 0.0) bound[k] = true;
    if (hi[i] - x[i] <= eps[i] && g[i] > 0.0) bound[k] = true;
  }
  return bound;
}

// Solves (-H_FF + mu diag) d_F = g_F, increasing mu until the shifted
// matrix is positive definite. Returns false when no shift works.
bool newton_direction(const Eigen::VectorXd& g, const Eigen::MatrixXd& h,
                      const std::vector<bool>& bound, Eigen::VectorXd& dir) {
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!bound[static_cast<std::size_t>(i)]) free.push_back(i);
  }
  dir = Eigen::VectorXd::Zero(g.size());
  if (free.empty()) return true;
  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd a(nf, nf);
  Eigen::VectorXd b(nf);
  Eigen::VectorXd scale(nf);
  for (Eigen::Index r = 0; r < nf; ++r) {
    b[r] = g[free[r]];
    for (Eigen::Index c = 0; c < nf; ++c) a(r, c) = -h(free[r], free[c]);
    scale[r] = std::max(std::abs(a(r, r)), 1e-300);
  }
  double mu = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal() += mu * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd d = llt.solve(b);
      if (d.allFinite() && d.dot(b) > 0.0) {
        for (Eigen::Index r = 0; r < nf; ++r) dir[free[r]] = d[r];
        return true;
      }
    }
    mu = mu == 0.0 ? 1e-8 : mu * 10.0;
  }
  return false;
}

}  // namespace

double projected_gradient_norm(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper) {
  double norm = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double gi = g[i];
    if (x[i] <= lower[i] && gi < 0.0) gi = 0.0;
    if (x[i] >= upper[i] && gi > 0.0) gi = 0.0;
    norm = std::max(norm, std::abs(gi));
  }
  return norm;
}

BoxNewtonResult maximize_box_newton(const BoxProblem& problem,
                                    Eigen::VectorXd start,
                                    const BoxNewtonOptions& options) {
  const Eigen::VectorXd& lo = problem.lower;
  const Eigen::VectorXd& hi = problem.upper;
  const Eigen::VectorXd eps = 1e-12 * (hi - lo).cwiseMax(1.0);

  BoxNewtonResult res;
  res.x = project(start, lo, hi);
  res.value = problem.value(res.x);
  if (!std::isfinite(res.value)) {
    res.message = "objective undefined at the starting point";
    return res;
  }

  // Consecutive steps that left the objective unchanged while the Newton
  // decrement was already below rounding noise.
  int stagnant = 0;
  Eigen::VectorXd g(res.x.size());
  Eigen::MatrixXd h(res.x.size(), res.x.size());
  for (res.iterations = 0; res.iterations <= options.max_iterations;
       ++res.iterations) {
    try {
      problem.derivatives(res.x, g, h);
    } catch (const EvaluationError& e) {
      res.message = std::string("derivative evaluation failed: ") + e.what();
      return res;
    }
    if (!g.allFinite() || !h.allFinite()) {
      res.message = "non-finite derivatives";
      return res;
    }
    // Snap variables within eps of a bound onto it so that the projected
    // gradient reflects constraint activity exactly.
    for (Eigen::Index i = 0; i < res.x.size(); ++i) {
      if (res.x[i] - lo[i] <= eps[i] && g[i] < 0.0) res.x[i] = lo[i];
      if (hi[i] - res.x[i] <= eps[i] && g[i] > 0.0) res.x[i] = hi[i];
    }
    res.projected_gradient_norm = projected_gradient_norm(res.x, g, lo, hi);
    if (res.projected_gradient_norm < options.gradient_tolerance) {
      res.converged = true;
      res.message = "projected gradient below tolerance";
      return res;
    }
    if (res.iterations == options.max_iterations) break;

    // Inflate the binding tolerance by the distance a gradient-scaled step
    // would travel, so near-bound variables are held rather than zig-zagged.
    Eigen::VectorXd eps_k(res.x.size());
    for (Eigen::Index i = 0; i < res.x.size(); ++i) {
      const double curvature = std::max(std::abs(h(i, i)), 1e-300);
      eps_k[i] = std::max(eps[i], std::min(1e-6 * (hi[i] - lo[i]),
                                           std::abs(g[i]) / curvature));
    }
    const std::vector<bool> bound = binding_set(res.x, g, lo, hi, eps_k);

    Eigen::VectorXd dir;
    bool accepted = false;
    // Newton decrement g.d of the first direction; NaN if none was found.
    double decrement = std::numeric_limits<double>::quiet_NaN();
    for (int kind = 0; kind < 2 && !accepted; ++kind) {
      if (kind == 0) {
        if (!newton_direction(g, h, bound, dir)) continue;
        decrement = g.dot(dir);
      } else {
        // Diagonally scaled gradient ascent as a fallback.
        dir = Eigen::VectorXd::Zero(g.size());
        for (Eigen::Index i = 0; i < g.size(); ++i) {
          if (!bound[static_cast<std::size_t>(i)]) {
            dir[i] = g[i] / std::max(std::abs(h(i, i)), 1e-300);
          }
        }
      }
      // Near the optimum the remaining gain drops below the rounding noise
      // of the objective; a full step is then accepted if it does not lose
      // more than that noise, so Newton keeps shrinking the gradient.
      const double noise = kNoiseUlps * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(res.value));
      double step = 1.0;
      for (int bt = 0; bt < kMaxBacktracks; ++bt, step *= 0.5) {
        const Eigen::VectorXd trial = project(res.x + step * dir, lo, hi);
        const double predicted = g.dot(trial - res.x);
        if (!(predicted > 0.0) && bt > 0) break;
        const double value = problem.value(trial);
        if (!std::isfinite(value)) continue;
        const bool armijo =
            value >= res.value + kArmijo * predicted && value >= res.value;
        const bool within_noise =
            kind == 0 && bt == 0 && predicted <= noise &&
            value >= res.value - noise;
        if (armijo || within_noise) {
          const bool moved = (trial - res.x).cwiseAbs().maxCoeff() > 0.0;
          stagnant = value > res.value || !(decrement <= noise) ? 0 : stagnant + 1;
          res.x = trial;
          res.value = std::max(value, res.value);
          accepted = moved;
          break;
        }
      }
    }
    if (stagnant >= 3) {
      res.converged = true;
      res.message = "Newton decrement below rounding noise";
      return res;
    }
    if (!accepted) {
      // The quadratic model promises no gain above rounding noise: the step
      // is below the resolution of x (typically a coordinate pressed
      // against a bound with enormous curvature).
      const double noise = kNoiseUlps * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(res.value));
      if (decrement <= noise) {
        res.converged = true;
        res.message = "Newton decrement below rounding noise";
        return res;
      }
      res.message = "line search stalled with projected gradient " +
                    std::to_string(res.projected_gradient_norm);
      return res;
    }
  }
  res.iterations = options.max_iterations;
  res.message = "iteration limit reached";
  return res;
}

}  // namespace depdse::detail
