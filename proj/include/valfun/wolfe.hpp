#pragma once

#include <string>
#include <vector>

#include "valfun/config.hpp"
#include "valfun/problem.hpp"

namespace valfun {

/// (D_x): minimize L(x,y,λ) over (y,λ) subject to ∇_y L = 0, λ >= 0.
class DualProblem {
 public:
  DualProblem(const ParametricProblem& p, VectorXd x);
  int dim() const noexcept { return m_ + q_; }
  double objective(const VectorXd& y, const VectorXd& lambda) const;
  VectorXd constraint(const VectorXd& y, const VectorXd& lambda) const;  // ∇_y L, length m
  const ParametricProblem& problem() const noexcept { return *p_; }
  const VectorXd& x() const noexcept { return x_; }

 private:
  const ParametricProblem* p_;
  VectorXd x_;
  int m_, q_;
};

struct DualResult {
  double value = 0.0;  // best found, an upper bound on V_D(x)
  VectorXd y, lambda;
  double kkt_residual = 0.0;  // ‖∇_y L‖∞ at the minimizer
  bool possibly_unbounded = false;
  int starts = 0;
  int converged = 0;
};

/// Multi-start penalized local minimization, seeded from the inner solver's KKT points.
DualResult dual_value(const ParametricProblem& p, const VectorXd& x, const SolverConfig& cfg);

struct DualityMargin {
  VectorXd x;
  double primal = 0.0;
  double dual = 0.0;
  double margin = 0.0;  // dual − primal
  bool ok = false;        // no violation observed
  bool verified = false;  // a feasible dual point was found
  std::string note;
};

struct WeakDualityReport {
  std::vector<DualityMargin> points;
  bool all_ok = true;
  double min_margin = 0.0;
};

/// V(x) <= V_D(x) + 1e-6 at every x; needs the concave_in_y flag.
WeakDualityReport check_weak_duality(const ParametricProblem& p, const std::vector<VectorXd>& xs,
                                     const SolverConfig& cfg);

}  // namespace valfun
