#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hatescan/error.hpp"

namespace hatescan {

struct LineSearchParams {
  double c1 = 1e-4;      // Armijo sufficient-decrease constant
  double shrink = 0.5;   // step multiplier per backtrack
  int max_backtracks = 50;
};

struct LbfgsConfig {
  int memory = 10;
  LineSearchParams line_search;
  double tol = 1e-6;  // stop when the gradient infinity norm drops to this
  int max_iter = 1000;
};

// Returns f(x) and writes the gradient into `grad` (same size as x).
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;  // false: max_iter reached first
  double grad_inf_norm = 0.0;
};

// Raised when backtracking exhausts max_backtracks without sufficient decrease.
class LineSearchError : public Error {
 public:
  LineSearchError(const std::string& what, std::vector<double> last_iterate, double last_f)
      : Error(what), last_iterate_(std::move(last_iterate)), last_f_(last_f) {}

  const std::vector<double>& last_iterate() const { return last_iterate_; }
  double last_value() const { return last_f_; }

 private:
  std::vector<double> last_iterate_;
  double last_f_;
};

// Called after every accepted step with the iteration number and new value.
using IterationObserver = std::function<void(int iteration, double f)>;

// Limited-memory BFGS with backtracking Armijo line search. Curvature pairs
// with non-positive s'y are skipped so the implicit Hessian stays positive
// definite. Non-finite values at the start point raise Error.
LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<double> x0, const LbfgsConfig& cfg,
                           const IterationObserver& observer = {});

}  // namespace hatescan
