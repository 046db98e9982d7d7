#pragma once

// Limited-memory quasi-Newton minimization under box constraints.
//
// This is a projected variant rather than the full Cauchy-point/subspace
// algorithm: variables sitting on a bound with the gradient pushing outward
// are frozen for the iteration, the two-loop recursion runs on the rest, and
// a backtracking Armijo search runs along the projected path. Every iterate
// is feasible and the objective never increases.

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace plume::bts {

struct Box {
  Eigen::VectorXd lower;  ///< -inf allowed
  Eigen::VectorXd upper;  ///< +inf allowed

  Eigen::VectorXd project(const Eigen::VectorXd& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
};

struct LbfgsOptions {
  int memory = 10;
  int max_iter = 500;
  /// Stop when |f_k - f_{k+1}| <= tol * max(|f_k|, |f_{k+1}|).
  double tol = 1e-8;
  /// Stop when the projected gradient's max-norm falls below this.
  double pg_tol = 1e-12;
};

enum class LbfgsStatus { Converged, MaxIterations, NonFinite };

struct LbfgsResult {
  Eigen::VectorXd x;  ///< last feasible iterate
  double f = 0.0;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  std::vector<double> trace;  ///< objective after every accepted step, starting at x0
};

/// f(x, grad) returns the value and writes the gradient.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

LbfgsResult minimize_box(const Objective& f, const Eigen::VectorXd& x0, const Box& box, const LbfgsOptions& options = {});

}  // namespace plume::bts
