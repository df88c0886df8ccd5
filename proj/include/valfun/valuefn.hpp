#pragma once

#include <cstdint>
#include <vector>

#include "valfun/config.hpp"
#include "valfun/problem.hpp"

namespace valfun {

struct Solution {
  VectorXd y;
  double f = 0.0;
  double kkt_residual = 0.0;
  VectorXd lambda;  // KKT multipliers from nonnegative least squares
  bool on_box_boundary = false;
};

struct SolveReport {
  VectorXd x;
  double value = 0.0;
  std::vector<Solution> solutions;  // sorted lexicographically in y
  SolverConfig config;
  int starts = 0;
  long iterations = 0;
  int max_rounds = 0;
  int grid_points = 0;
  int grid_feasible = 0;
  int candidates = 0;  // converged points within value_tol of the best
  int clusters = 0;    // before the max_clusters cap
  bool truncated = false;
};

/// Grid-seeded multi-start local ascent; the surrogate for V(x) and S(x).
SolveReport solve_inner(const ParametricProblem& p, const VectorXd& x, const SolverConfig& cfg);
SolveReport solve_inner(const ParametricProblem& p, const VectorXd& x);

double value(const ParametricProblem& p, const VectorXd& x, const SolverConfig& cfg);
double value(const ParametricProblem& p, const VectorXd& x);

struct GradientSample {
  VectorXd x;
  VectorXd grad;       // central differences
  double score = 0.0;  // max |forward − backward| over coordinates
  bool smooth = false;
};

/// Finite-difference gradients of V at n_samples points of the radius-ball around x.
std::vector<GradientSample> numeric_subdiff_oracle(const ParametricProblem& p, const VectorXd& x, double radius,
                                                   int n_samples, double h, const SolverConfig& cfg);

}  // namespace valfun
