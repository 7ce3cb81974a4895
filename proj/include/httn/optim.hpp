#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace httn::optim {

/// Objective returning f(x) and writing the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  std::size_t max_iterations = 1000;
  std::size_t memory = 10;
  double gradient_tolerance = 1e-9;
  /// Stop when the relative decrease of f over one iteration falls below this.
  double function_tolerance = 1e-15;
  double c1 = 1e-4;
  double c2 = 0.9;
  std::size_t max_line_search_evaluations = 30;
};

enum class LbfgsStatus { kConverged, kMaxIterations, kLineSearchFailed, kNonFinite };

std::string to_string(LbfgsStatus status);

struct LbfgsResult {
  Eigen::VectorXd x;        ///< best point seen
  double value = 0.0;       ///< objective at x
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::vector<double> trace;  ///< best value after each iteration, starting with f(x0)
  LbfgsStatus status = LbfgsStatus::kMaxIterations;
};

/// Limited-memory BFGS with a strong-Wolfe line search. Non-finite objective
/// values are treated as failures and the best point seen is returned.
LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options = {});

}  // namespace httn::optim
