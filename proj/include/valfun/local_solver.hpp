#pragma once

#include "valfun/config.hpp"
#include "valfun/problem.hpp"

namespace valfun {

VectorXd project_box(const Box& box, VectorXd y);

struct AscentResult {
  VectorXd y;
  double f = 0.0;
  double violation = 0.0;  // max(0, max_i g_i)
  int iterations = 0;
  int rounds = 0;
  bool polished = false;
  bool ok = false;  // false when the start could not be evaluated
};

/// Penalized projected-gradient ascent of f − ρ/2 Σ max(0, g_i)² over the search box,
/// ρ = 10 doubling each round until the violation drops below activity_tol; every
/// round ends with an active-set Newton polish that is kept when it yields a feasible
/// KKT point nearby.
AscentResult penalty_ascent(const ParametricProblem& p, const VectorXd& x, const VectorXd& y0,
                            const SolverConfig& cfg);

/// Active-set Newton on the KKT system, coordinates at box bounds held fixed.
/// Returns true and updates y when it converges to a feasible point near the input.
bool kkt_polish(const ParametricProblem& p, const VectorXd& x, VectorXd& y, double activity_tol);

struct KktResidual {
  double residual = 0.0;  // ‖∇_y f − ∇_y g_A λ‖∞ over coordinates off the box boundary
  VectorXd lambda;        // nonnegative least-squares multipliers, zero off the active set
  bool on_box_boundary = false;
};

KktResidual kkt_residual(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, double activity_tol);

}  // namespace valfun
