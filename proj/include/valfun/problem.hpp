#pragma once

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "valfun/config.hpp"
#include "valfun/expr.hpp"
#include "valfun/program.hpp"

namespace valfun {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};
using Box = std::vector<Interval>;

struct Flags {
  bool concave_in_y = false;
  bool separable_xy = false;
  bool restricted_sup_compactness_assumed = false;
};

struct Point {
  VectorXd x;
  VectorXd y;
  std::optional<VectorXd> lambda;
};

/// f, g and their derivatives at one (x, y). Matrix layouts follow the
/// gradient-as-column convention: gx is n×q, gy is m×q, fxy is n×m.
struct PointEval {
  double f = 0.0;
  VectorXd fx, fy;
  MatrixXd fyy, fxy;
  VectorXd g;
  MatrixXd gx, gy;
  std::vector<MatrixXd> gyy, gxy;
};

struct LagrangianEval {
  int r = 1;
  double value = 0.0;
  VectorXd grad_x, grad_y;
  MatrixXd hess_yy, hess_xy;
  VectorXd g_values;
  MatrixXd jac_y_g, jac_x_g;
};

/// Inner maximization problem  max_y f(x,y)  s.t.  g(x,y) <= 0, parametrized by x.
class ParametricProblem {
 public:
  ParametricProblem(std::string id, int n, int m, expr::Expression f, std::vector<expr::Expression> g,
                    Box x_domain, Box y_search_box, std::map<std::string, double> params, Flags flags,
                    SolverConfig solver = {});

  const std::string& id() const noexcept { return id_; }
  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  int q() const noexcept { return static_cast<int>(g_.size()); }
  const expr::Expression& objective() const noexcept { return f_; }
  const std::vector<expr::Expression>& constraints() const noexcept { return g_; }
  const Box& x_domain() const noexcept { return x_domain_; }
  const Box& y_search_box() const noexcept { return y_box_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }
  const Flags& flags() const noexcept { return flags_; }
  const SolverConfig& solver_defaults() const noexcept { return solver_; }
  const expr::VariableTable& table() const noexcept { return table_; }

  double f(const VectorXd& x, const VectorXd& y) const;
  VectorXd g(const VectorXd& x, const VectorXd& y) const;

  /// f, g and their y-gradients; the hot path of the local solvers.
  void eval_y(const VectorXd& x, const VectorXd& y, double& f, VectorXd& fy, VectorXd& g,
              MatrixXd& gy) const;

  /// Everything up to the mixed and yy second derivatives.
  PointEval eval_full(const VectorXd& x, const VectorXd& y) const;

  /// f, ∇_x f and ∇_y f.
  void eval_grad(const VectorXd& x, const VectorXd& y, double& f, VectorXd& fx, VectorXd& fy) const;

  void check_dims(const VectorXd& x, const VectorXd& y) const;

 private:
  std::vector<double> slots(const VectorXd& x, const VectorXd& y) const;

  std::string id_;
  int n_, m_;
  expr::Expression f_;
  std::vector<expr::Expression> g_;
  Box x_domain_, y_box_;
  std::map<std::string, double> params_;
  Flags flags_;
  SolverConfig solver_;
  expr::VariableTable table_;

  expr::Program p_value_, p_y_, p_full_, p_grad_;
};

LagrangianEval eval_lagrangian(const ParametricProblem& p, const Point& pt, int r);
LagrangianEval lagrangian_from(const PointEval& e, const VectorXd& lambda, int r);

struct FdReport {
  double max_first = 0.0;   // relative discrepancy of first derivatives
  double max_second = 0.0;  // relative discrepancy of second derivatives
  std::string worst;        // which entry produced the larger discrepancy
  bool pass = false;
};

/// Symbolic vs. central-difference derivatives of f and every g_i.
FdReport fd_check(const ParametricProblem& p, const Point& pt);

/// Problem file loader; `overrides` must name declared parameters.
ParametricProblem load_problem(std::string_view document,
                               const std::map<std::string, double>& overrides = {});

std::vector<std::string> builtin_names();
std::string builtin_document(std::string_view name);
ParametricProblem load_builtin(std::string_view name, const std::map<std::string, double>& overrides = {});

/// Resolves a builtin name or a path to a problem file.
ParametricProblem load_problem_spec(const std::string& name_or_path,
                                    const std::map<std::string, double>& overrides = {});

}  // namespace valfun
