#pragma once

#include <optional>
#include <string>
#include <vector>

#include "valfun/polyhedra.hpp"
#include "valfun/problem.hpp"

namespace valfun {

/// The MPEC index sets at (x, y, λ); indices are 0-based.
struct IndexPartition {
  std::vector<int> i0p;  // g_i = 0, λ_i > 0
  std::vector<int> ip0;  // g_i < 0, λ_i = 0
  std::vector<int> i00;  // g_i = 0, λ_i = 0
};

/// Classifies constraints by activity of g and support of λ.
IndexPartition partition_indices(const VectorXd& g, const VectorXd& lambda, double activity_tol);

/// Indices with g_i >= -activity_tol.
std::vector<int> active_set(const VectorXd& g, double activity_tol);

enum class MultiplierKind { Sigma, MSet, Xi };

struct MultiplierSet {
  MultiplierKind kind = MultiplierKind::Sigma;
  int r = 1;
  Polyhedron poly;
  std::vector<int> active;                 // I_g for Σ and M
  std::optional<IndexPartition> partition;  // for Ξ
  double activity_tol = 1e-6;
  std::vector<std::string> warnings;

  /// Vertices and rays, tolerant of the small equality residuals a numerical y leaves.
  GeneratorSet generators() const;
};

/// Σ^r(x,y) = {λ >= 0 : r∇_y f − ∇_y g λ = 0, λ_i = 0 off I_g}; with beta the
/// right-hand side r∇_y f is replaced by beta (the set M).
MultiplierSet sigma_set(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, int r,
                        const std::optional<VectorXd>& beta = std::nullopt, double activity_tol = 1e-6);

/// Ξ^r(x,y,λ) over u in R^m.
MultiplierSet xi_set(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, const VectorXd& lambda,
                     int r, double activity_tol = 1e-6, double dual_tol = 1e-6);

/// Same construction from already evaluated derivatives.
MultiplierSet xi_set_from(const PointEval& e, const VectorXd& lambda, int r, double activity_tol = 1e-6,
                          double dual_tol = 1e-6);

/// Warnings for multipliers inside (tol, 10·tol).
std::vector<std::string> borderline_warnings(const VectorXd& lambda, double activity_tol);

}  // namespace valfun
