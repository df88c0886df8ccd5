#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace valfun {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// { z in R^dim : A z <= b, E z = c }.
struct Polyhedron {
  int dim = 0;
  MatrixXd A;
  VectorXd b;
  MatrixXd E;
  VectorXd c;

  Polyhedron() = default;
  explicit Polyhedron(int d);

  void add_le(const VectorXd& row, double rhs);
  void add_ge(const VectorXd& row, double rhs) { add_le(-row, -rhs); }
  void add_eq(const VectorXd& row, double rhs);

  int num_ineq() const noexcept { return static_cast<int>(A.rows()); }
  int num_eq() const noexcept { return static_cast<int>(E.rows()); }

  /// Largest constraint violation at z (0 when feasible).
  double violation(const VectorXd& z) const;
  /// Largest violation of the recession-cone constraints along r.
  double ray_violation(const VectorXd& r) const;
};

struct GeneratorSet {
  std::vector<VectorXd> vertices;
  std::vector<VectorXd> rays;  // unit length; a lineality direction appears as +r and -r
  bool empty() const noexcept { return vertices.empty(); }
};

enum class LpStatus { Empty, Unbounded, Optimal, Feasible };

struct LpResult {
  LpStatus status = LpStatus::Empty;
  VectorXd point;
  double value = 0.0;
  VectorXd ray;        // improving direction when unbounded
  VectorXd dual_ineq;  // y >= 0 on A z <= b
  VectorXd dual_eq;    // w on E z = c;  A^T y + E^T w = objective at the optimum
  long pivots = 0;
};

/// Maximizes objective over poly (two-phase simplex, Bland's rule). With no
/// objective, returns any feasible point.
LpResult lp_solve(const Polyhedron& poly, const std::optional<VectorXd>& objective = std::nullopt);

struct ResidualResult {
  VectorXd point;
  double residual = 0.0;  // smallest uniform relaxation t making the system feasible
};

/// Solves  min t  s.t.  A z <= b + t,  |E z - c| <= t,  t >= 0. With
/// relax_inequalities = false, the inequalities are enforced exactly.
ResidualResult min_residual(const Polyhedron& poly, bool relax_inequalities = true);

/// min_residual with exact inequalities, followed by a least-squares correction on the
/// equalities and tight inequalities; residual is the final violation.
ResidualResult solve_system(const Polyhedron& poly);

/// Vertices and extreme rays via the double-description method (dim <= 8).
/// Equalities consistent to eq_tol (relative) are accepted in least-squares form.
GeneratorSet enumerate_generators(const Polyhedron& poly, double tol = 1e-9, double eq_tol = 1e-8);

struct HullResult {
  bool inside = false;
  VectorXd weights;  // over the supplied generator list
  double residual = 0.0;
};

/// point in co(generators)? With n_cap, the weights use at most n_cap + 1 generators.
HullResult hull_membership(const VectorXd& point, const std::vector<VectorXd>& generators,
                           std::optional<int> n_cap = std::nullopt, double tol = 1e-6);

struct ConicHullResult {
  bool inside = false;
  VectorXd vertex_weights;
  VectorXd ray_weights;
  double residual = 0.0;
};

/// point in co(vertices) + cone(rays)?
ConicHullResult generator_membership(const VectorXd& point, const GeneratorSet& gens, double tol = 1e-6);

/// Matches two vertex lists (set equality within tol).
bool same_point_sets(std::vector<VectorXd> a, std::vector<VectorXd> b, double tol);

}  // namespace valfun
