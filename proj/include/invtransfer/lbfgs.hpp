#pragma once

#include <functional>

#include <Eigen/Core>

namespace invtransfer {

/// Objective returning f(x) and writing the gradient into `grad`.
/// Returning a non-finite value marks x as infeasible; the line search backs off.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  int max_iterations = 100;
  int history = 8;
  double gradient_tolerance = 1e-6;
  double relative_tolerance = 1e-10;
  int max_line_search = 30;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Box-constrained limited-memory BFGS minimizer: L-BFGS two-loop directions,
/// projected onto the box, Armijo backtracking. Never returns a point worse
/// than the (projected) start.
LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper, const LbfgsOptions& options = {});

} // namespace invtransfer
