#include "valfun/subdiff.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "valfun/error.hpp"
#include "valfun/multipliers.hpp"

namespace valfun {

const char* to_string(EstimateKind k) {
  switch (k) {
    case EstimateKind::Frechet: return "frechet";
    case EstimateKind::Limiting: return "limiting";
    case EstimateKind::Horizon: return "horizon";
    case EstimateKind::LipschitzEqn1: return "lipschitz_eqn1";
    case EstimateKind::LipschitzHorizonEqn2: return "lipschitz_horizon_eqn2";
    case EstimateKind::ClarkeHull: return "clarke_hull";
  }
  return "?";
}

EstimateKind estimate_kind_from_string(const std::string& s) {
  for (auto k : {EstimateKind::Frechet, EstimateKind::Limiting, EstimateKind::Horizon, EstimateKind::LipschitzEqn1,
                 EstimateKind::LipschitzHorizonEqn2, EstimateKind::ClarkeHull})
    if (s == to_string(k)) return k;
  throw Error("unknown estimate kind '" + s + "'");
}

namespace {

constexpr double kZero = 1e-10;

void dedupe(std::vector<VectorXd>& pts) {
  std::vector<VectorXd> out;
  for (auto& p : pts) {
    bool dup = false;
    for (const auto& o : out)
      if ((o - p).lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(1.0, p.lpNorm<Eigen::Infinity>())) dup = true;
    if (!dup) out.push_back(p);
  }
  pts = std::move(out);
}

// Adds the image of a direction; zero images vanish, others become unit rays.
bool push_ray(std::vector<VectorXd>& rays, const VectorXd& image) {
  double nr = image.norm();
  if (nr <= kZero) return false;
  rays.push_back(image / nr);
  return true;
}

std::string vec_text(const VectorXd& v) {
  std::string s = "(";
  for (int i = 0; i < v.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", v[i]);
    s += buf;
  }
  return s + ")";
}

// One (y, λ) piece of the Ξ-based estimates.
EstimatePiece xi_piece(const PointEval& e, const VectorXd& y, const VectorXd& lambda, int r, double tol,
                       std::vector<std::string>& warnings) {
  EstimatePiece piece;
  piece.y = y;
  piece.lambda = lambda;
  LagrangianEval L = lagrangian_from(e, lambda, 1);
  MultiplierSet xi = xi_set_from(e, lambda, r, tol);
  for (auto& w : xi.warnings) warnings.push_back(w);
  GeneratorSet gens = xi.generators();
  for (const auto& v : gens.vertices)
    piece.set.vertices.push_back(r == 1 ? VectorXd(L.grad_x + L.hess_xy * v) : VectorXd(L.hess_xy * v));
  for (const auto& d : gens.rays)
    if (push_ray(piece.set.rays, L.hess_xy * d))
      warnings.push_back("UnboundedEstimate: ray " + vec_text(piece.set.rays.back()) + " at y = " + vec_text(y));
  dedupe(piece.set.vertices);
  dedupe(piece.set.rays);
  return piece;
}

}  // namespace

GeneratorSet EstimateSet::pooled() const {
  GeneratorSet out;
  for (const auto& pc : pieces) {
    out.vertices.insert(out.vertices.end(), pc.set.vertices.begin(), pc.set.vertices.end());
    out.rays.insert(out.rays.end(), pc.set.rays.begin(), pc.set.rays.end());
  }
  dedupe(out.vertices);
  dedupe(out.rays);
  return out;
}

EstimateSet upper_estimate(const ParametricProblem& p, const VectorXd& x, EstimateKind kind, const SolveReport* solve,
                           const std::optional<Point>& designated) {
  EstimateSet out;
  out.kind = kind;
  out.n = p.n();
  const double tol = p.solver_defaults().activity_tol;
  if (p.flags().restricted_sup_compactness_assumed) out.assumptions.push_back("restricted_sup_compactness_assumed");
  if (p.flags().concave_in_y) out.assumptions.push_back("concave_in_y");
  if (p.flags().separable_xy) out.assumptions.push_back("separable_xy");
  if (kind == EstimateKind::LipschitzHorizonEqn2 || kind == EstimateKind::Horizon)
    out.assumptions.push_back("lambda fixed at vertices of Sigma; the Lipschitz-criterion set pairs u with lambda only through this choice");

  std::vector<Point> pts;
  SolveReport local;
  if (kind == EstimateKind::Frechet && designated) {
    pts.push_back(*designated);
  } else {
    if (!solve) {
      local = solve_inner(p, x);
      solve = &local;
    }
    for (const auto& s : solve->solutions) pts.push_back({x, s.y, std::nullopt});
    if (kind == EstimateKind::Frechet && !pts.empty()) {
      // First solution whose multiplier makes ∇_y L vanish in every coordinate, box ones included.
      std::size_t pick = 0;
      for (std::size_t i = 0; i < solve->solutions.size(); ++i) {
        const Solution& s = solve->solutions[i];
        PointEval e = p.eval_full(x, s.y);
        if (lagrangian_from(e, s.lambda, 1).grad_y.lpNorm<Eigen::Infinity>() <= 1e-6) {
          pick = i;
          break;
        }
      }
      pts = {pts[pick]};
      pts[0].lambda = solve->solutions[pick].lambda;
    }
  }

  for (const Point& pt : pts) {
    p.check_dims(pt.x, pt.y);
    PointEval e = p.eval_full(x, pt.y);
    std::vector<VectorXd> lambdas;
    if (pt.lambda) {
      lambdas.push_back(*pt.lambda);
    } else if (kind != EstimateKind::LipschitzHorizonEqn2) {
      GeneratorSet sig = sigma_set(p, x, pt.y, 1, std::nullopt, tol).generators();
      if (sig.empty()) {
        out.warnings.push_back("no KKT multiplier at y = " + vec_text(pt.y) + "; solution skipped");
        continue;
      }
      lambdas = sig.vertices;
      for (const auto& r : sig.rays)
        out.warnings.push_back("unbounded-multiplier piece: Sigma has ray " + vec_text(r) + " at y = " +
                               vec_text(pt.y));
    }

    switch (kind) {
      case EstimateKind::Frechet:
      case EstimateKind::Limiting:
      case EstimateKind::ClarkeHull:
      case EstimateKind::Horizon: {
        int r = kind == EstimateKind::Horizon ? 0 : 1;
        for (const auto& lam : lambdas) out.pieces.push_back(xi_piece(e, pt.y, lam, r, tol, out.warnings));
        break;
      }
      case EstimateKind::LipschitzEqn1: {
        EstimatePiece piece;
        piece.y = pt.y;
        for (const auto& lam : lambdas) piece.set.vertices.push_back(e.fx - e.gx * lam);
        GeneratorSet sig = sigma_set(p, x, pt.y, 1, std::nullopt, tol).generators();
        for (const auto& rr : sig.rays) push_ray(piece.set.rays, -e.gx * rr);
        dedupe(piece.set.vertices);
        dedupe(piece.set.rays);
        out.pieces.push_back(std::move(piece));
        break;
      }
      case EstimateKind::LipschitzHorizonEqn2: {
        EstimatePiece piece;
        piece.y = pt.y;
        GeneratorSet sig0 = sigma_set(p, x, pt.y, 0, std::nullopt, tol).generators();
        for (const auto& v : sig0.vertices) piece.set.vertices.push_back(e.gx * v);
        for (const auto& rr : sig0.rays) push_ray(piece.set.rays, e.gx * rr);
        if (!piece.set.rays.empty())
          out.warnings.push_back("UnboundedEstimate: Sigma^0 maps to a nonzero ray at y = " + vec_text(pt.y));
        dedupe(piece.set.vertices);
        dedupe(piece.set.rays);
        out.pieces.push_back(std::move(piece));
        break;
      }
    }
  }
  return out;
}

ContainmentResult estimate_contains(const EstimateSet& e, const VectorXd& v, double tol) {
  ContainmentResult out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.pieces.size(); ++i) {
    if (e.pieces[i].set.empty()) continue;
    ConicHullResult r = generator_membership(v, e.pieces[i].set, tol);
    best = std::min(best, r.residual);
    if (r.inside) {
      out.where = Containment::InsidePiece;
      out.piece = static_cast<int>(i);
      out.residual = r.residual;
      return out;
    }
  }
  GeneratorSet all = e.pooled();
  if (!all.empty()) {
    ConicHullResult r = generator_membership(v, all, tol);
    if (r.inside) {
      out.where = Containment::InsideHullOnly;
      out.residual = r.residual;
      return out;
    }
    best = std::min(best, r.residual);
  }
  out.residual = best;
  return out;
}

SingularCheck singular_condition_check(const ParametricProblem& p, const VectorXd& x, const VectorXd& y,
                                       double activity_tol) {
  SingularCheck out;
  MultiplierSet s0 = sigma_set(p, x, y, 0, std::nullopt, activity_tol);
  GeneratorSet gens = s0.generators();
  PointEval e = p.eval_full(x, y);
  auto test = [&](const VectorXd& lam) {
    VectorXd img = e.gx * lam;
    if (out.holds && img.size() && img.norm() > 1e-8) {
      out.holds = false;
      out.witness_lambda = lam;
      out.witness_image = img;
    }
  };
  for (const auto& v : gens.vertices) test(v);
  for (const auto& r : gens.rays) test(r);
  return out;
}

}  // namespace valfun
