// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// Projected Newton ascent on a box (Bertsekas-style two-metric projection):
// Newton steps on the free variables, projection onto the box, Armijo
// backtracking along the projection arc.

#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

namespace depdse::detail {

struct BoxProblem {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  /// Objective; returns -inf outside its domain, never throws.
  std::function<double(const Eigen::VectorXd&)> value;
  /// Gradient and Hessian at an interior point of the domain. May throw.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&,
                     Eigen::MatrixXd&)>
      derivatives;
};

struct BoxNewtonOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
};

struct BoxNewtonResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  double projected_gradient_norm = 0.0;
  std::string message;
};

/// Infinity norm of the projected gradient: components pushing a variable
/// out through a bound it already sits on are dropped.
double projected_gradient_norm(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper);

BoxNewtonResult maximize_box_newton(const BoxProblem& problem,
                                    Eigen::VectorXd start,
                                    const BoxNewtonOptions& options);

}  // namespace depdse::detail
