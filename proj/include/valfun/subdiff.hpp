#pragma once

#include <optional>
#include <string>
#include <vector>

#include "valfun/polyhedra.hpp"
#include "valfun/problem.hpp"
#include "valfun/valuefn.hpp"

namespace valfun {

enum class EstimateKind { Frechet, Limiting, Horizon, LipschitzEqn1, LipschitzHorizonEqn2, ClarkeHull };

const char* to_string(EstimateKind k);
EstimateKind estimate_kind_from_string(const std::string& s);

struct EstimatePiece {
  VectorXd y;
  VectorXd lambda;
  bool lambda_ray = false;  // λ is an extreme ray of Σ rather than a vertex
  GeneratorSet set;         // in x-space
};

struct EstimateSet {
  EstimateKind kind = EstimateKind::Limiting;
  int n = 0;
  std::vector<EstimatePiece> pieces;
  std::vector<std::string> warnings;
  std::vector<std::string> assumptions;

  /// All piece generators pooled; its convex hull is the convexified union.
  GeneratorSet pooled() const;
};

/// Upper estimate of the chosen kind at x. For Frechet, `designated` fixes (ȳ, λ̄);
/// otherwise the first listed solution with its KKT multiplier is used.
EstimateSet upper_estimate(const ParametricProblem& p, const VectorXd& x, EstimateKind kind,
                           const SolveReport* solve = nullptr, const std::optional<Point>& designated = std::nullopt);

enum class Containment { InsidePiece, InsideHullOnly, Outside };

struct ContainmentResult {
  Containment where = Containment::Outside;
  int piece = -1;
  double residual = 0.0;
};

ContainmentResult estimate_contains(const EstimateSet& e, const VectorXd& v, double tol = 1e-6);

struct SingularCheck {
  bool holds = true;
  VectorXd witness_lambda;  // generator of Σ^0 with nonzero image
  VectorXd witness_image;
};

/// {∇_x g λ : λ ∈ Σ^0(x,y)} = {0}?
SingularCheck singular_condition_check(const ParametricProblem& p, const VectorXd& x, const VectorXd& y,
                                       double activity_tol = 1e-6);

}  // namespace valfun
