#include "valfun/wolfe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "valfun/error.hpp"
#include "valfun/linalg.hpp"
#include "valfun/local_solver.hpp"
#include "valfun/valuefn.hpp"

namespace valfun {

DualProblem::DualProblem(const ParametricProblem& p, VectorXd x) : p_(&p), x_(std::move(x)), m_(p.m()), q_(p.q()) {
  if (x_.size() != p.n()) throw DimensionMismatch("x has wrong length");
}

double DualProblem::objective(const VectorXd& y, const VectorXd& lambda) const {
  return p_->f(x_, y) - p_->g(x_, y).dot(lambda);
}

VectorXd DualProblem::constraint(const VectorXd& y, const VectorXd& lambda) const {
  double f;
  VectorXd fy, g;
  MatrixXd gy;
  p_->eval_y(x_, y, f, fy, g, gy);
  return fy - gy * lambda;
}

namespace {

constexpr double kFeasTol = 1e-6;

struct DualEval {
  double phi = std::numeric_limits<double>::infinity();
  double L = 0.0;
  double infeas = 0.0;
  VectorXd grad;  // over (y, λ)
  VectorXd c;     // ∇_y L
  MatrixXd J;     // ∂c/∂(y, λ)
};

DualEval evaluate(const ParametricProblem& p, const VectorXd& x, const VectorXd& z, double rho) {
  const int m = p.m(), q = p.q();
  DualEval out;
  PointEval e;
  try {
    e = p.eval_full(x, z.head(m));
  } catch (const DomainError&) {
    return out;
  }
  VectorXd lambda = z.tail(q);
  LagrangianEval L = lagrangian_from(e, lambda, 1);
  out.L = L.value;
  out.c = L.grad_y;
  out.J = MatrixXd(m, m + q);
  out.J << L.hess_yy, -e.gy.transpose();
  out.infeas = m ? out.c.lpNorm<Eigen::Infinity>() : 0.0;
  out.phi = out.L + 0.5 * rho * out.c.squaredNorm();
  VectorXd gradL(m + q);
  gradL << L.grad_y, -e.g;
  out.grad = gradL + rho * out.J.transpose() * out.c;
  if (!std::isfinite(out.phi)) out.phi = std::numeric_limits<double>::infinity();
  return out;
}

VectorXd project(const ParametricProblem& p, VectorXd z) {
  const int m = p.m();
  z.head(m) = project_box(p.y_search_box(), z.head(m));
  for (int i = m; i < z.size(); ++i) z[i] = std::max(0.0, z[i]);
  return z;
}

void descend(const ParametricProblem& p, const VectorXd& x, VectorXd& z, double rho, int max_iter) {
  DualEval cur = evaluate(p, x, z, rho);
  if (!std::isfinite(cur.phi)) return;
  double alpha = 1.0 / std::max(1.0, cur.grad.lpNorm<Eigen::Infinity>());
  for (int it = 0; it < max_iter; ++it) {
    VectorXd pg = project(p, z - cur.grad) - z;
    if (pg.lpNorm<Eigen::Infinity>() <= 1e-11) return;
    bool accepted = false;
    VectorXd z_new;
    DualEval next;
    for (int bt = 0; bt < 60; ++bt) {
      z_new = project(p, z - alpha * cur.grad);
      next = evaluate(p, x, z_new, rho);
      if (next.phi <= cur.phi + 1e-4 * cur.grad.dot(z_new - z)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return;
    VectorXd s = z_new - z, t = next.grad - cur.grad;
    double st = s.dot(t);
    alpha = std::clamp(st > 0 ? s.squaredNorm() / st : 2 * alpha, 1e-12, 1e12);
    z = z_new;
    cur = next;
    if (cur.phi < -1e12) return;
  }
}

// Gauss-Newton restoration onto ∇_y L = 0 with λ kept nonnegative.
void restore(const ParametricProblem& p, const VectorXd& x, VectorXd& z) {
  for (int it = 0; it < 30; ++it) {
    DualEval e = evaluate(p, x, z, 0.0);
    if (!std::isfinite(e.phi) || e.infeas <= 1e-13) return;
    VectorXd step = min_norm_solve(e.J, -e.c, 1e-12);
    z = project(p, z + step);
  }
}

}  // namespace

DualResult dual_value(const ParametricProblem& p, const VectorXd& x, const SolverConfig& cfg) {
  const int m = p.m(), q = p.q();
  std::vector<VectorXd> seeds;
  try {
    SolveReport sr = solve_inner(p, x, cfg);
    for (const auto& s : sr.solutions) {
      VectorXd z(m + q);
      z << s.y, s.lambda;
      seeds.push_back(z);
    }
  } catch (const NoFeasiblePoint&) {
  }
  std::mt19937_64 rng(cfg.seed + 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int s = 0; s < cfg.n_starts; ++s) {
    VectorXd z(m + q);
    for (int j = 0; j < m; ++j) {
      const Interval& iv = p.y_search_box()[j];
      z[j] = iv.lo + unif(rng) * (iv.hi - iv.lo);
    }
    for (int i = 0; i < q; ++i) z[m + i] = unif(rng);
    seeds.push_back(z);
  }

  DualResult out;
  out.value = std::numeric_limits<double>::infinity();
  out.starts = static_cast<int>(seeds.size());
  for (const VectorXd& seed : seeds) {
    // The seed itself is a candidate, so the running minimum never exceeds a feasible seed.
    std::vector<VectorXd> tries{seed};
    VectorXd z = seed;
    double rho = 10.0;
    for (int round = 0; round < 6; ++round, rho *= 10.0) {
      descend(p, x, z, rho, cfg.max_iter);
      VectorXd r = z;
      restore(p, x, r);
      tries.push_back(r);
      DualEval e = evaluate(p, x, r, 0.0);
      if (std::isfinite(e.phi) && e.infeas <= kFeasTol) break;
    }
    bool any = false;
    for (const auto& t : tries) {
      DualEval e = evaluate(p, x, t, 0.0);
      if (!std::isfinite(e.phi) || e.infeas > kFeasTol) continue;
      any = true;
      if (e.L < out.value) {
        out.value = e.L;
        out.y = t.head(m);
        out.lambda = t.tail(q);
        out.kkt_residual = e.infeas;
      }
    }
    out.converged += any;
  }
  if (out.converged == 0) throw NoConvergedStart("no dual start reached grad_y L = 0");
  out.possibly_unbounded = out.value < -1e8;
  return out;
}

WeakDualityReport check_weak_duality(const ParametricProblem& p, const std::vector<VectorXd>& xs,
                                     const SolverConfig& cfg) {
  if (!p.flags().concave_in_y) throw Unsupported("weak duality requires the concave_in_y flag");
  WeakDualityReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& x : xs) {
    DualityMargin d;
    d.x = x;
    d.primal = value(p, x, cfg);
    try {
      DualResult dr = dual_value(p, x, cfg);
      d.dual = dr.value;
      d.margin = d.dual - d.primal;
      d.ok = d.margin >= -1e-6;
      d.verified = true;
      if (dr.possibly_unbounded) d.note = "possibly unbounded";
    } catch (const NoConvergedStart& e) {
      d.dual = std::numeric_limits<double>::infinity();
      d.margin = d.dual;
      d.ok = true;
      d.note = "dual feasible set not reached";
    }
    rep.all_ok = rep.all_ok && d.ok;
    if (d.verified) rep.min_margin = std::min(rep.min_margin, d.margin);
    rep.points.push_back(std::move(d));
  }
  return rep;
}

}  // namespace valfun
