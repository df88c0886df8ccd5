#include "valfun/local_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "valfun/error.hpp"
#include "valfun/linalg.hpp"
#include "valfun/multipliers.hpp"

namespace valfun {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct PenaltyEval {
  double phi = kNegInf;
  double f = 0.0;
  double violation = 0.0;
  VectorXd grad;
};

PenaltyEval penalty(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, double rho) {
  PenaltyEval out;
  double f;
  VectorXd fy, g;
  MatrixXd gy;
  try {
    p.eval_y(x, y, f, fy, g, gy);
  } catch (const DomainError&) {
    return out;
  }
  if (!std::isfinite(f)) return out;
  out.f = f;
  out.phi = f;
  out.grad = fy;
  for (int i = 0; i < g.size(); ++i)
    if (g[i] > 0) {
      out.phi -= 0.5 * rho * g[i] * g[i];
      out.grad -= rho * g[i] * gy.col(i);
      out.violation = std::max(out.violation, g[i]);
    }
  return out;
}

std::vector<bool> at_bounds(const Box& box, const VectorXd& y) {
  std::vector<bool> out(y.size());
  for (int j = 0; j < y.size(); ++j) {
    double w = 1e-12 * std::max(1.0, std::abs(y[j]));
    out[j] = std::abs(y[j] - box[j].lo) <= w || std::abs(y[j] - box[j].hi) <= w;
  }
  return out;
}

// One projected-gradient run at fixed rho; returns iterations used.
int ascend(const ParametricProblem& p, const VectorXd& x, VectorXd& y, double rho, int max_iter, PenaltyEval& cur) {
  const Box& box = p.y_search_box();
  double alpha = 1.0 / std::max(1.0, cur.grad.lpNorm<Eigen::Infinity>());
  int it = 0;
  for (; it < max_iter; ++it) {
    VectorXd pg = project_box(box, y + cur.grad) - y;
    if (pg.lpNorm<Eigen::Infinity>() <= 1e-11) break;
    VectorXd y_new;
    PenaltyEval next;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      y_new = project_box(box, y + alpha * cur.grad);
      next = penalty(p, x, y_new, rho);
      if (next.phi >= cur.phi + 1e-4 * cur.grad.dot(y_new - y)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    VectorXd s = y_new - y, t = next.grad - cur.grad;
    double st = s.dot(t);
    alpha = st < 0 ? s.squaredNorm() / -st : 2 * alpha;
    alpha = std::clamp(alpha, 1e-12, 1e12);
    double moved = s.lpNorm<Eigen::Infinity>();
    y = y_new;
    cur = next;
    if (moved <= 1e-15 * std::max(1.0, y.lpNorm<Eigen::Infinity>())) break;
  }
  return it;
}

}  // namespace

VectorXd project_box(const Box& box, VectorXd y) {
  for (int j = 0; j < y.size(); ++j) y[j] = std::clamp(y[j], box[j].lo, box[j].hi);
  return y;
}

bool kkt_polish(const ParametricProblem& p, const VectorXd& x, VectorXd& y, double activity_tol) {
  const int m = p.m(), q = p.q();
  const Box& box = p.y_search_box();
  VectorXd z = y;
  std::vector<bool> fixed = at_bounds(box, z);
  std::vector<int> free;
  for (int j = 0; j < m; ++j)
    if (!fixed[j]) free.push_back(j);
  const int nf = static_cast<int>(free.size());

  PointEval e;
  try {
    e = p.eval_full(x, z);
  } catch (const DomainError&) {
    return false;
  }
  std::vector<bool> in_A(q, false);
  for (int i = 0; i < q; ++i) in_A[i] = e.g[i] > -1e-5;
  const double reach = 1e-3 * std::max(1.0, y.lpNorm<Eigen::Infinity>());

  for (int change = 0; change <= 2 * q + 2; ++change) {
    std::vector<int> A;
    for (int i = 0; i < q; ++i)
      if (in_A[i]) A.push_back(i);
    const int k = static_cast<int>(A.size());
    if (k > nf) return false;
    auto gyA = [&](const PointEval& ev) {
      MatrixXd G(nf, k);
      for (int a = 0; a < nf; ++a)
        for (int b = 0; b < k; ++b) G(a, b) = ev.gy(free[a], A[b]);
      return G;
    };
    auto fyF = [&](const PointEval& ev) {
      VectorXd v(nf);
      for (int a = 0; a < nf; ++a) v[a] = ev.fy[free[a]];
      return v;
    };
    VectorXd lam = nnls(gyA(e), fyF(e));
    double res = 0.0;
    for (int it = 0; it < 40; ++it) {
      VectorXd lfull = VectorXd::Zero(q);
      for (int b = 0; b < k; ++b) lfull[A[b]] = lam[b];
      LagrangianEval L = lagrangian_from(e, lfull, 1);
      MatrixXd G = gyA(e);
      VectorXd F(nf + k);
      for (int a = 0; a < nf; ++a) F[a] = L.grad_y[free[a]];
      for (int b = 0; b < k; ++b) F[nf + b] = e.g[A[b]];
      res = F.size() ? F.lpNorm<Eigen::Infinity>() : 0.0;
      if (res <= 1e-14 * std::max(1.0, std::abs(e.f))) break;
      MatrixXd J = MatrixXd::Zero(nf + k, nf + k);
      for (int a = 0; a < nf; ++a)
        for (int c = 0; c < nf; ++c) J(a, c) = L.hess_yy(free[a], free[c]);
      J.topRightCorner(nf, k) = -G;
      J.bottomLeftCorner(k, nf) = G.transpose();
      VectorXd step = min_norm_solve(J, -F, 1e-12);
      for (int a = 0; a < nf; ++a) z[free[a]] += step[a];
      lam += step.tail(k);
      if ((z - y).lpNorm<Eigen::Infinity>() > reach) return false;
      try {
        e = p.eval_full(x, z);
      } catch (const DomainError&) {
        return false;
      }
    }
    if (res > 1e-9 * std::max(1.0, std::abs(e.f))) return false;
    // Active-set corrections: drop a negative multiplier, or add the worst violated constraint.
    int drop = -1, add = -1;
    double worst_l = -1e-12, worst_g = 1e-12;
    for (int b = 0; b < k; ++b)
      if (lam[b] < worst_l) {
        worst_l = lam[b];
        drop = A[b];
      }
    for (int i = 0; i < q; ++i)
      if (!in_A[i] && e.g[i] > worst_g) {
        worst_g = e.g[i];
        add = i;
      }
    if (drop >= 0) {
      in_A[drop] = false;
      continue;
    }
    if (add >= 0) {
      in_A[add] = true;
      continue;
    }
    for (int j = 0; j < m; ++j)
      if (z[j] < box[j].lo || z[j] > box[j].hi) return false;
    if (q && e.g.maxCoeff() > 1e-3 * activity_tol) return false;
    y = z;
    return true;
  }
  return false;
}

AscentResult penalty_ascent(const ParametricProblem& p, const VectorXd& x, const VectorXd& y0,
                            const SolverConfig& cfg) {
  AscentResult out;
  VectorXd y = project_box(p.y_search_box(), y0);
  double rho = 10.0;
  PenaltyEval cur = penalty(p, x, y, rho);
  if (!std::isfinite(cur.phi)) return out;
  for (int round = 0; round < 60; ++round) {
    out.iterations += ascend(p, x, y, rho, cfg.max_iter, cur);
    out.rounds = round + 1;
    VectorXd trial = y;
    if (kkt_polish(p, x, trial, cfg.activity_tol)) {
      PenaltyEval pe = penalty(p, x, trial, rho);
      // Under concavity a feasible KKT point is a global maximizer, whatever the infeasible iterate scored.
      bool keep = p.flags().concave_in_y || pe.f >= cur.f - 1e-6 * std::max(1.0, std::abs(cur.f));
      if (std::isfinite(pe.phi) && keep) {
        y = trial;
        cur = pe;
        out.polished = true;
        break;
      }
    }
    if (cur.violation < cfg.activity_tol) break;
    rho *= 2.0;
    cur = penalty(p, x, y, rho);
  }
  out.y = y;
  out.f = cur.f;
  out.violation = cur.violation;
  out.ok = true;
  return out;
}

KktResidual kkt_residual(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, double activity_tol) {
  KktResidual out;
  double f;
  VectorXd fy, g;
  MatrixXd gy;
  p.eval_y(x, y, f, fy, g, gy);
  std::vector<bool> fixed = at_bounds(p.y_search_box(), y);
  std::vector<int> free;
  for (int j = 0; j < p.m(); ++j) {
    if (fixed[j]) out.on_box_boundary = true;
    else free.push_back(j);
  }
  std::vector<int> A = active_set(g, activity_tol);
  MatrixXd G(free.size(), A.size());
  VectorXd rhs(free.size());
  for (std::size_t a = 0; a < free.size(); ++a) {
    rhs[a] = fy[free[a]];
    for (std::size_t b = 0; b < A.size(); ++b) G(a, b) = gy(free[a], A[b]);
  }
  VectorXd lam = nnls(G, rhs);
  out.lambda = VectorXd::Zero(p.q());
  for (std::size_t b = 0; b < A.size(); ++b) out.lambda[A[b]] = lam[b];
  out.residual = rhs.size() ? (rhs - G * lam).lpNorm<Eigen::Infinity>() : 0.0;
  return out;
}

}  // namespace valfun
