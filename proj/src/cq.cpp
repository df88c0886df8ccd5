#include "valfun/cq.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "valfun/error.hpp"
#include "valfun/linalg.hpp"
#include "valfun/multipliers.hpp"
#include "valfun/polyhedra.hpp"

namespace valfun {

const char* to_string(CqKind k) {
  switch (k) {
    case CqKind::LicqInner: return "licq_inner";
    case CqKind::LicqDualSystem: return "licq_dual_system";
    case CqKind::MpecLicq: return "mpec_licq";
    case CqKind::Mfcq: return "mfcq";
    case CqKind::CrcqSampled: return "crcq_sampled";
  }
  return "?";
}

const char* to_string(CqVerdict v) {
  switch (v) {
    case CqVerdict::Holds: return "holds";
    case CqVerdict::Fails: return "fails";
    case CqVerdict::HoldsOnSamples: return "holds_on_samples";
  }
  return "?";
}

namespace {

void require_feasible(const VectorXd& g, double tol) {
  for (int i = 0; i < g.size(); ++i)
    if (g[i] > tol) throw InfeasiblePoint("g_" + std::to_string(i + 1) + " = " + std::to_string(g[i]) + " > 0");
}

bool at_bound(double v, double bound, double tol) { return std::isfinite(bound) && std::abs(v - bound) <= tol; }

void finish_rank(CqReport& rep) {
  rep.family_size = static_cast<int>(rep.family.rows());
  rep.rank = rank(rep.family, rep.rank_tol);
  if (rep.rank == rep.family_size) {
    rep.verdict = CqVerdict::Holds;
    return;
  }
  rep.verdict = CqVerdict::Fails;
  MatrixXd left = null_space(rep.family.transpose(), rep.rank_tol);
  rep.witness = left.col(0);
}

}  // namespace

CqReport check_licq(const ParametricProblem& p, const Point& pt, LicqSystem system, double activity_tol,
                    double rank_tol) {
  p.check_dims(pt.x, pt.y);
  const int n = p.n(), m = p.m(), q = p.q();
  PointEval e = p.eval_full(pt.x, pt.y);
  require_feasible(e.g, activity_tol);
  CqReport rep;
  rep.rank_tol = rank_tol;
  rep.activity_tol = activity_tol;
  std::vector<VectorXd> rows;

  if (system == LicqSystem::Inner) {
    rep.kind = CqKind::LicqInner;
    for (int i : active_set(e.g, activity_tol)) {
      rows.push_back(e.gy.col(i));
      rep.labels.push_back("grad_y g" + std::to_string(i + 1));
    }
    rep.family = MatrixXd(rows.size(), m);
  } else {
    if (!pt.lambda) throw Error("check_licq: this system needs lambda");
    const VectorXd& lambda = *pt.lambda;
    if (lambda.size() != q) throw DimensionMismatch("lambda must have length q");
    LagrangianEval L = lagrangian_from(e, lambda, 1);
    const int d = n + m + q;
    auto lambda_row = [&](int i) {
      VectorXd r = VectorXd::Zero(d);
      r[n + m + i] = 1.0;
      rows.push_back(r);
      rep.labels.push_back("lambda" + std::to_string(i + 1));
    };
    auto stationarity_rows = [&] {
      for (int j = 0; j < m; ++j) {
        VectorXd r(d);
        r << L.hess_xy.col(j), L.hess_yy.col(j), -e.gy.row(j).transpose();
        rows.push_back(r);
        rep.labels.push_back("grad_y L row " + std::to_string(j + 1));
      }
    };
    if (system == LicqSystem::DualSystem) {
      rep.kind = CqKind::LicqDualSystem;
      if (q && lambda.minCoeff() < -1e-8) throw InfeasiblePoint("lambda has a negative component");
      if (m && L.grad_y.cwiseAbs().maxCoeff() > 1e-6) throw InfeasiblePoint("grad_y L does not vanish");
      stationarity_rows();
      for (int i = 0; i < q; ++i)
        if (lambda[i] <= activity_tol) lambda_row(i);
    } else {
      rep.kind = CqKind::MpecLicq;
      if (m && L.grad_y.cwiseAbs().maxCoeff() > 1e-6) throw InfeasiblePoint("grad_y L does not vanish");
      IndexPartition part = partition_indices(e.g, lambda, activity_tol);
      for (int i : part.ip0)
        if (std::abs(lambda[i]) > activity_tol) throw InfeasiblePoint("complementarity violated");
      const Box& X = p.x_domain();
      for (int k = 0; k < n; ++k) {
        if (at_bound(pt.x[k], X[k].lo, activity_tol) || at_bound(pt.x[k], X[k].hi, activity_tol)) {
          VectorXd r = VectorXd::Zero(d);
          r[k] = 1.0;
          rows.push_back(r);
          rep.labels.push_back("x" + std::to_string(k + 1) + " bound");
        }
      }
      stationarity_rows();
      std::vector<int> g_rows = part.i0p, l_rows = part.ip0;
      g_rows.insert(g_rows.end(), part.i00.begin(), part.i00.end());
      l_rows.insert(l_rows.end(), part.i00.begin(), part.i00.end());
      std::sort(g_rows.begin(), g_rows.end());
      std::sort(l_rows.begin(), l_rows.end());
      for (int i : g_rows) {
        VectorXd r = VectorXd::Zero(d);
        r.head(n) = e.gx.col(i);
        r.segment(n, m) = e.gy.col(i);
        rows.push_back(r);
        rep.labels.push_back("g" + std::to_string(i + 1));
      }
      for (int i : l_rows) lambda_row(i);
    }
    rep.family = MatrixXd(rows.size(), d);
  }
  for (std::size_t k = 0; k < rows.size(); ++k) rep.family.row(k) = rows[k].transpose();
  finish_rank(rep);
  return rep;
}

CqReport check_mfcq(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, double activity_tol,
                    double lp_tol) {
  p.check_dims(x, y);
  double f;
  VectorXd fy, g;
  MatrixXd gy;
  p.eval_y(x, y, f, fy, g, gy);
  require_feasible(g, activity_tol);
  CqReport rep;
  rep.kind = CqKind::Mfcq;
  rep.activity_tol = activity_tol;
  std::vector<int> A = active_set(g, activity_tol);
  const int k = static_cast<int>(A.size()), m = p.m();
  rep.family = MatrixXd(k, m);
  for (int i = 0; i < k; ++i) {
    rep.family.row(i) = gy.col(A[i]).transpose();
    rep.labels.push_back("grad_y g" + std::to_string(A[i] + 1));
  }
  rep.family_size = k;
  rep.rank = rank(rep.family, rep.rank_tol);
  rep.verdict = CqVerdict::Holds;
  if (k == 0) return rep;

  Polyhedron P(k);
  for (int j = 0; j < m; ++j) P.add_eq(rep.family.col(j), 0.0);
  for (int i = 0; i < k; ++i) {
    VectorXd e = VectorXd::Zero(k);
    e[i] = 1.0;
    P.add_ge(e, 0.0);
  }
  P.add_le(VectorXd::Ones(k), 1.0);
  LpResult lp = lp_solve(P, VectorXd::Ones(k));
  if (lp.status == LpStatus::Optimal && lp.value > lp_tol) {
    rep.verdict = CqVerdict::Fails;
    VectorXd full = VectorXd::Zero(p.q());
    for (int i = 0; i < k; ++i) full[A[i]] = lp.point[i];
    rep.witness = full / full.norm();
  }
  return rep;
}

CqReport check_crcq_sampled(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, double radius,
                            int n_samples, std::uint64_t seed, double activity_tol, double rank_tol) {
  p.check_dims(x, y);
  if (!(radius > 0)) throw Error("check_crcq_sampled: radius must be positive");
  double f;
  VectorXd fy, g;
  MatrixXd gy;
  p.eval_y(x, y, f, fy, g, gy);
  require_feasible(g, activity_tol);
  std::vector<int> A = active_set(g, activity_tol);
  if (A.size() > 12) throw Unsupported("CRCQ subset enumeration is capped at 12 active constraints");
  CqReport rep;
  rep.kind = CqKind::CrcqSampled;
  rep.verdict = CqVerdict::HoldsOnSamples;
  rep.samples = n_samples;
  rep.rank_tol = rank_tol;
  rep.activity_tol = activity_tol;
  const int k = static_cast<int>(A.size()), n = p.n(), m = p.m();
  if (k == 0) return rep;

  auto subset_rank = [&](const MatrixXd& G, unsigned mask) {
    MatrixXd S(std::popcount(mask), m);
    int r = 0;
    for (int i = 0; i < k; ++i)
      if (mask >> i & 1u) S.row(r++) = G.col(A[i]).transpose();
    return rank(S, rank_tol);
  };
  const unsigned full = (1u << k) - 1u;
  std::vector<int> center(full + 1);
  for (unsigned mask = 1; mask <= full; ++mask) center[mask] = subset_rank(gy, mask);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int d = n + m;
  for (int s = 0; s < n_samples; ++s) {
    VectorXd dir(d);
    for (int i = 0; i < d; ++i) dir[i] = normal(rng);
    dir *= radius * std::pow(unif(rng), 1.0 / d) / dir.norm();
    VectorXd xs = x + dir.head(n), ys = y + dir.tail(m);
    VectorXd gs;
    MatrixXd gys;
    try {
      p.eval_y(xs, ys, f, fy, gs, gys);
    } catch (const DomainError&) {
      continue;
    }
    for (unsigned mask = 1; mask <= full; ++mask) {
      int rs = subset_rank(gys, mask);
      if (rs != center[mask]) {
        rep.verdict = CqVerdict::Fails;
        for (int i = 0; i < k; ++i)
          if (mask >> i & 1u) rep.witness_subset.push_back(A[i]);
        rep.sample_x = xs;
        rep.sample_y = ys;
        rep.rank_center = center[mask];
        rep.rank_sample = rs;
        return rep;
      }
    }
  }
  return rep;
}

}  // namespace valfun
