#include "valfun/multipliers.hpp"

#include <cmath>

#include "valfun/error.hpp"

namespace valfun {

namespace {

// Equalities built from a numerically located y are consistent only up to solver accuracy.
constexpr double kEqTol = 1e-6;

VectorXd unit(int d, int i) {
  VectorXd e = VectorXd::Zero(d);
  e[i] = 1.0;
  return e;
}

}  // namespace

std::vector<int> active_set(const VectorXd& g, double activity_tol) {
  std::vector<int> out;
  for (int i = 0; i < g.size(); ++i)
    if (g[i] >= -activity_tol) out.push_back(i);
  return out;
}

IndexPartition partition_indices(const VectorXd& g, const VectorXd& lambda, double activity_tol) {
  if (g.size() != lambda.size()) throw DimensionMismatch("partition: g and lambda lengths differ");
  IndexPartition out;
  for (int i = 0; i < g.size(); ++i) {
    bool active = g[i] >= -activity_tol;
    bool positive = lambda[i] > activity_tol;
    if (active && positive) out.i0p.push_back(i);
    else if (active) out.i00.push_back(i);
    else out.ip0.push_back(i);
  }
  return out;
}

std::vector<std::string> borderline_warnings(const VectorXd& lambda, double activity_tol) {
  std::vector<std::string> out;
  for (int i = 0; i < lambda.size(); ++i)
    if (lambda[i] > activity_tol && lambda[i] < 10 * activity_tol)
      out.push_back("BorderlineActivity: lambda_" + std::to_string(i + 1) + " = " + std::to_string(lambda[i]));
  return out;
}

GeneratorSet MultiplierSet::generators() const { return enumerate_generators(poly, 1e-9, kEqTol); }

MultiplierSet sigma_set(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, int r,
                        const std::optional<VectorXd>& beta, double activity_tol) {
  p.check_dims(x, y);
  if (r != 0 && r != 1) throw Error("sigma_set: r must be 0 or 1");
  double f;
  VectorXd fy, g;
  MatrixXd gy;
  p.eval_y(x, y, f, fy, g, gy);
  const int m = p.m(), q = p.q();
  for (int i = 0; i < q; ++i)
    if (g[i] > activity_tol)
      throw InfeasiblePoint("g_" + std::to_string(i + 1) + " = " + std::to_string(g[i]) + " exceeds activity_tol");
  VectorXd rhs = r * fy;
  if (beta) {
    if (beta->size() != m) throw DimensionMismatch("beta must have length m");
    rhs = *beta;
  }

  MultiplierSet out;
  out.kind = beta ? MultiplierKind::MSet : MultiplierKind::Sigma;
  out.r = r;
  out.activity_tol = activity_tol;
  out.active = active_set(g, activity_tol);
  out.poly = Polyhedron(q);
  for (int j = 0; j < m; ++j) out.poly.add_eq(gy.row(j).transpose(), rhs[j]);
  std::vector<bool> is_active(q, false);
  for (int i : out.active) is_active[i] = true;
  for (int i = 0; i < q; ++i) {
    if (is_active[i]) out.poly.add_ge(unit(q, i), 0.0);
    else out.poly.add_eq(unit(q, i), 0.0);
  }
  return out;
}

MultiplierSet xi_set_from(const PointEval& e, const VectorXd& lambda, int r, double activity_tol, double dual_tol) {
  const int m = static_cast<int>(e.fy.size()), q = static_cast<int>(e.g.size());
  if (lambda.size() != q) throw DimensionMismatch("lambda must have length q");
  if (r != 0 && r != 1) throw Error("xi_set: r must be 0 or 1");
  if (q > 0 && lambda.minCoeff() < -1e-8) throw NotDualFeasible("lambda has a negative component");
  LagrangianEval L1 = lagrangian_from(e, lambda, 1);
  double res = m ? L1.grad_y.cwiseAbs().maxCoeff() : 0.0;
  if (res > dual_tol) throw NotDualFeasible("grad_y L = " + std::to_string(res) + " exceeds tolerance");

  MultiplierSet out;
  out.kind = MultiplierKind::Xi;
  out.r = r;
  out.activity_tol = activity_tol;
  out.partition = partition_indices(e.g, lambda, activity_tol);
  out.warnings = borderline_warnings(lambda, activity_tol);
  out.poly = Polyhedron(m);
  for (int j = 0; j < m; ++j) out.poly.add_eq(L1.hess_yy.row(j).transpose(), 0.0);
  for (int i = 0; i < q; ++i) {
    // −∇_y g_iᵀu − r g_i  (= 0 on the support of λ, >= 0 elsewhere)
    VectorXd row = e.gy.col(i);
    if (lambda[i] > activity_tol) out.poly.add_eq(row, -r * e.g[i]);
    else out.poly.add_le(row, -r * e.g[i]);
  }
  return out;
}

MultiplierSet xi_set(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, const VectorXd& lambda,
                     int r, double activity_tol, double dual_tol) {
  p.check_dims(x, y);
  return xi_set_from(p.eval_full(x, y), lambda, r, activity_tol, dual_tol);
}

}  // namespace valfun
