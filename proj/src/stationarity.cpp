#include "valfun/stationarity.hpp"

#include <cmath>
#include <limits>

#include "valfun/error.hpp"
#include "valfun/linalg.hpp"
#include "valfun/polyhedra.hpp"
#include "valfun/valuefn.hpp"

namespace valfun {

const char* to_string(MpecClass c) {
  switch (c) {
    case MpecClass::Weak: return "weak";
    case MpecClass::C: return "c";
    case MpecClass::M: return "m";
    case MpecClass::S: return "s";
  }
  return "?";
}

const char* to_string(SystemStatus s) {
  switch (s) {
    case SystemStatus::Holds: return "holds";
    case SystemStatus::Fails: return "fails";
    case SystemStatus::NotApplicable: return "not_applicable";
  }
  return "?";
}

namespace {

constexpr double kHoldTol = 1e-7;

struct Facet {
  int k;
  double sign;  // outward normal sign·e_k
};

std::vector<Facet> active_facets(const ParametricProblem& p, const VectorXd& x, double tol) {
  std::vector<Facet> out;
  const Box& X = p.x_domain();
  for (int k = 0; k < p.n(); ++k) {
    if (std::isfinite(X[k].hi) && std::abs(x[k] - X[k].hi) <= tol) out.push_back({k, 1.0});
    else if (std::isfinite(X[k].lo) && std::abs(x[k] - X[k].lo) <= tol) out.push_back({k, -1.0});
  }
  return out;
}

VectorXd unit(int d, int i) {
  VectorXd e = VectorXd::Zero(d);
  e[i] = 1.0;
  return e;
}

struct Context {
  PointEval e;
  LagrangianEval L;
  VectorXd lambda;
  IndexPartition part;
  std::vector<Facet> facets;
};

Context mpec_context(const ParametricProblem& p, const Point& pt, double tol) {
  p.check_dims(pt.x, pt.y);
  if (!pt.lambda) throw NotMpecFeasible("a multiplier lambda is required");
  Context c;
  c.lambda = *pt.lambda;
  if (c.lambda.size() != p.q()) throw DimensionMismatch("lambda must have length q");
  c.e = p.eval_full(pt.x, pt.y);
  c.L = lagrangian_from(c.e, c.lambda, 1);
  const int q = p.q();
  if (p.m() && c.L.grad_y.lpNorm<Eigen::Infinity>() > 1e-6) throw NotMpecFeasible("grad_y L does not vanish");
  for (int i = 0; i < q; ++i) {
    if (c.e.g[i] > tol) throw NotMpecFeasible("g_" + std::to_string(i + 1) + " > 0");
    if (c.lambda[i] < -1e-8) throw NotMpecFeasible("lambda_" + std::to_string(i + 1) + " < 0");
    if (c.e.g[i] < -tol && c.lambda[i] > tol) throw NotMpecFeasible("complementarity fails at " + std::to_string(i + 1));
  }
  c.part = partition_indices(c.e.g, c.lambda, tol);
  c.facets = active_facets(p, pt.x, tol);
  return c;
}

// Weak-stationarity rows over z = (u, α, β, ν).
Polyhedron weak_system(const Context& c, int n, int m, int q) {
  const int nf = static_cast<int>(c.facets.size());
  const int d = m + 2 * q + nf;
  const int ou = 0, oa = m, ob = m + q, on = m + 2 * q;
  Polyhedron P(d);
  for (int k = 0; k < n; ++k) {
    VectorXd r = VectorXd::Zero(d);
    r.segment(ou, m) = c.L.hess_xy.row(k).transpose();
    r.segment(oa, q) = c.e.gx.row(k).transpose();
    for (int f = 0; f < nf; ++f)
      if (c.facets[f].k == k) r[on + f] = c.facets[f].sign;
    P.add_eq(r, -c.e.fx[k]);
  }
  for (int j = 0; j < m; ++j) {
    VectorXd r = VectorXd::Zero(d);
    r.segment(ou, m) = c.L.hess_yy.row(j).transpose();
    r.segment(oa, q) = c.e.gy.row(j).transpose();
    P.add_eq(r, -c.e.fy[j]);
  }
  for (int i = 0; i < q; ++i) {
    VectorXd r = VectorXd::Zero(d);
    r.segment(ou, m) = -c.e.gy.col(i);
    r[ob + i] = -1.0;
    P.add_eq(r, 0.0);
  }
  for (int i : c.part.ip0) P.add_eq(unit(d, oa + i), 0.0);
  for (int i : c.part.i0p) P.add_eq(unit(d, ob + i), 0.0);
  for (int f = 0; f < nf; ++f) P.add_ge(unit(d, on + f), 0.0);
  return P;
}

MpecMultipliers unpack(const VectorXd& z, int m, int q, int nf) {
  MpecMultipliers mm;
  mm.u = z.segment(0, m);
  mm.alpha = z.segment(m, q);
  mm.beta = z.segment(m + q, q);
  mm.nu = z.segment(m + 2 * q, nf);
  return mm;
}

bool class_signs(MpecClass cls, double a, double b) {
  const double eps = kMpecEpsilon;
  switch (cls) {
    case MpecClass::Weak: return true;
    case MpecClass::S: return a >= -eps && b >= -eps;
    case MpecClass::C: return (a >= -eps && b >= -eps) || (a <= eps && b <= eps);
    case MpecClass::M: return std::abs(a) <= eps || std::abs(b) <= eps || (a >= eps * (1 - 1e-9) && b >= eps * (1 - 1e-9));
  }
  return false;
}

}  // namespace

MpecCheck check_mpec_multipliers(const ParametricProblem& p, const Point& pt, const MpecMultipliers& mult,
                                 MpecClass target, double activity_tol) {
  Context c = mpec_context(p, pt, activity_tol);
  const int n = p.n(), m = p.m(), q = p.q();
  const int nf = static_cast<int>(c.facets.size());
  VectorXd nu = mult.nu.size() == nf ? mult.nu : VectorXd::Zero(nf);
  if (mult.u.size() != m || mult.alpha.size() != q || mult.beta.size() != q)
    throw DimensionMismatch("multiplier lengths do not match the problem");
  VectorXd z(m + 2 * q + nf);
  z << mult.u, mult.alpha, mult.beta, nu;
  MpecCheck out;
  out.residual = weak_system(c, n, m, q).violation(z);
  out.in_class = true;
  for (int i : c.part.i00) out.in_class = out.in_class && class_signs(target, mult.alpha[i], mult.beta[i]);
  return out;
}

MpecResult find_mpec_multipliers(const ParametricProblem& p, const Point& pt, MpecClass target, double activity_tol) {
  Context c = mpec_context(p, pt, activity_tol);
  const int n = p.n(), m = p.m(), q = p.q();
  const int nf = static_cast<int>(c.facets.size());
  const int oa = m, ob = m + q;
  const int d = m + 2 * q + nf;
  MpecResult out;
  out.target = target;
  out.partition = c.part;
  const std::vector<int>& B = c.part.i00;
  const int k = static_cast<int>(B.size());
  if ((target == MpecClass::C || target == MpecClass::M) && k > 12)
    throw PatternLimitExceeded("|I_00| = " + std::to_string(k) + " exceeds 12");
  const Polyhedron base = weak_system(c, n, m, q);

  long patterns = 1;
  int branches = target == MpecClass::C ? 2 : target == MpecClass::M ? 3 : 1;
  for (int t = 0; t < k && branches > 1; ++t) patterns *= branches;
  const double eps = kMpecEpsilon;
  double best = std::numeric_limits<double>::infinity();
  for (long pat = 0; pat < patterns; ++pat) {
    Polyhedron P = base;
    long code = pat;
    for (int t = 0; t < k; ++t) {
      const int i = B[t];
      int br = branches > 1 ? static_cast<int>(code % branches) : 0;
      code /= std::max(branches, 1);
      VectorXd ea = unit(d, oa + i), eb = unit(d, ob + i);
      switch (target) {
        case MpecClass::Weak: break;
        case MpecClass::S:
          P.add_ge(ea, 0.0);
          P.add_ge(eb, 0.0);
          break;
        case MpecClass::C:
          if (br == 0) {
            P.add_ge(ea, -eps);
            P.add_ge(eb, -eps);
          } else {
            P.add_le(ea, eps);
            P.add_le(eb, eps);
          }
          break;
        case MpecClass::M:
          if (br == 0) {
            P.add_le(ea, eps);
            P.add_ge(ea, -eps);
          } else if (br == 1) {
            P.add_le(eb, eps);
            P.add_ge(eb, -eps);
          } else {
            P.add_ge(ea, eps);
            P.add_ge(eb, eps);
          }
          break;
      }
    }
    ++out.patterns_tried;
    ResidualResult r = solve_system(P);
    best = std::min(best, r.residual);
    if (r.residual <= kHoldTol) {
      out.holds = true;
      out.mult = unpack(r.point, m, q, nf);
      out.residual = base.violation(r.point);
      return out;
    }
  }
  out.residual = best;
  out.reason = "no multipliers in class " + std::string(to_string(target)) + "; smallest residual " +
               std::to_string(best);
  return out;
}

WolfeResult check_wolfe_system(const ParametricProblem& p, const VectorXd& x, const VectorXd& y,
                               const VectorXd& lambda, bool boundary, double activity_tol) {
  p.check_dims(x, y);
  const int n = p.n(), m = p.m(), q = p.q();
  if (lambda.size() != q) throw DimensionMismatch("lambda must have length q");
  PointEval e = p.eval_full(x, y);
  LagrangianEval L = lagrangian_from(e, lambda, 1);
  if (m && L.grad_y.lpNorm<Eigen::Infinity>() > 1e-6) throw NotKktPoint("grad_y L does not vanish");
  for (int i = 0; i < q; ++i) {
    if (e.g[i] > activity_tol) throw NotKktPoint("y is infeasible");
    if (lambda[i] < -1e-8) throw NotKktPoint("lambda has a negative component");
    if (e.g[i] < -activity_tol && lambda[i] > activity_tol) throw NotKktPoint("complementarity fails");
  }
  std::vector<Facet> facets;
  if (boundary) {
    facets = active_facets(p, x, activity_tol);
    if (facets.empty()) throw Error("boundary Wolfe system needs an active x-box facet");
  }
  const int nf = static_cast<int>(facets.size());
  const int d = m + nf;
  Polyhedron P(d);
  std::vector<VectorXd> eq_rows;
  for (int k = 0; k < n; ++k) {
    VectorXd r = VectorXd::Zero(d);
    r.head(m) = L.hess_xy.row(k).transpose();
    for (int f = 0; f < nf; ++f)
      if (facets[f].k == k) r[m + f] = facets[f].sign;
    P.add_eq(r, -L.grad_x[k]);
    eq_rows.push_back(r);
  }
  for (int j = 0; j < m; ++j) {
    VectorXd r = VectorXd::Zero(d);
    r.head(m) = L.hess_yy.row(j).transpose();
    P.add_eq(r, 0.0);
    eq_rows.push_back(r);
  }
  for (int i = 0; i < q; ++i) {
    VectorXd r = VectorXd::Zero(d);
    r.head(m) = e.gy.col(i);
    if (lambda[i] > activity_tol) {
      P.add_eq(r, -e.g[i]);
      eq_rows.push_back(r);
    } else {
      P.add_le(r, -e.g[i]);
    }
  }
  for (int f = 0; f < nf; ++f) P.add_ge(unit(d, m + f), 0.0);

  WolfeResult out;
  ResidualResult r = solve_system(P);
  out.residual = r.residual;
  MatrixXd Eq(eq_rows.size(), d);
  for (std::size_t i = 0; i < eq_rows.size(); ++i) Eq.row(i) = eq_rows[i].transpose();
  out.unique = null_space(Eq).cols() == 0;
  if (r.residual <= kHoldTol) {
    out.holds = true;
    out.u = r.point.head(m);
    out.nu = r.point.tail(nf);
  } else {
    out.reason = std::isfinite(r.residual) ? "smallest residual " + std::to_string(r.residual) : "system infeasible";
  }
  return out;
}

ConversionResult convert_wolfe_to_s(const ParametricProblem& p, const VectorXd& x, const VectorXd& y,
                                    const VectorXd& lambda, const VectorXd& u, const VectorXd& nu,
                                    double activity_tol) {
  PointEval e = p.eval_full(x, y);
  ConversionResult out;
  out.mult.u = u;
  out.mult.alpha = -lambda;
  out.mult.beta = -e.gy.transpose() * u;
  out.mult.nu = nu;
  Point pt{x, y, lambda};
  out.check = check_mpec_multipliers(p, pt, out.mult, MpecClass::S, activity_tol);
  if (out.check.residual > 1e-6 || !out.check.in_class)
    throw VerificationFailed("converted multipliers fail the S system (residual " +
                             std::to_string(out.check.residual) + ")");
  return out;
}

bool hierarchy_consistent(const StationarityCertificate& c) {
  const char* order[] = {"mpec_s", "mpec_m", "mpec_c", "mpec_weak"};
  bool stronger = false;
  for (const char* key : order) {
    auto it = c.systems.find(key);
    if (it == c.systems.end()) continue;
    bool h = it->second.status == SystemStatus::Holds;
    if (stronger && !h) return false;
    stronger = stronger || h;
  }
  return true;
}

StationarityCertificate certify_point(const ParametricProblem& p, const VectorXd& x, const VectorXd& y,
                                      const SolverConfig& cfg) {
  const double tol = cfg.activity_tol;
  const int n = p.n(), m = p.m(), q = p.q();
  StationarityCertificate cert;
  cert.candidate = {x, y, std::nullopt};
  cert.activity_tol = tol;
  if (p.flags().concave_in_y) cert.assumptions.push_back("concave_in_y");
  if (p.flags().separable_xy) cert.assumptions.push_back("separable_xy");
  if (p.flags().restricted_sup_compactness_assumed) cert.assumptions.push_back("restricted_sup_compactness_assumed");
  p.check_dims(x, y);

  SolveReport sr = solve_inner(p, x, cfg);
  PointEval e = p.eval_full(x, y);
  bool feasible = q == 0 || e.g.maxCoeff() <= tol;
  cert.solution_verified = feasible && e.f >= sr.value - std::max(cfg.value_tol, 1e-6);
  if (!cert.solution_verified) cert.warnings.push_back("y is not in the computed solution set");
  std::vector<Facet> facets = active_facets(p, x, tol);
  const int nf = static_cast<int>(facets.size());

  auto na = [](const std::string& why) {
    SystemVerdict v;
    v.status = SystemStatus::NotApplicable;
    v.reason = why;
    return v;
  };

  // Nash: 0 ∈ ∇_x f + N_X(x) and 0 ∈ −∇_y f + N_F(x)(y).
  {
    SystemVerdict v;
    bool on_box = false;
    for (int j = 0; j < m; ++j) {
      const Interval& iv = p.y_search_box()[j];
      double w = 1e-9 * std::max(1.0, std::abs(y[j]));
      on_box = on_box || std::abs(y[j] - iv.lo) <= w || std::abs(y[j] - iv.hi) <= w;
    }
    if (!feasible) {
      v = na("y is infeasible");
    } else {
      Polyhedron P(nf);
      for (int k = 0; k < n; ++k) {
        VectorXd r = VectorXd::Zero(nf);
        for (int f = 0; f < nf; ++f)
          if (facets[f].k == k) r[f] = facets[f].sign;
        P.add_eq(r, -e.fx[k]);
      }
      for (int f = 0; f < nf; ++f) P.add_ge(unit(nf, f), 0.0);
      ResidualResult rx = solve_system(P);
      std::vector<int> A = active_set(e.g, tol);
      MatrixXd G(m, A.size());
      for (std::size_t b = 0; b < A.size(); ++b) G.col(b) = e.gy.col(A[b]);
      VectorXd lamA = nnls(G, e.fy);
      double ry = m ? (e.fy - G * lamA).lpNorm<Eigen::Infinity>() : 0.0;
      VectorXd lam = VectorXd::Zero(q);
      for (std::size_t b = 0; b < A.size(); ++b) lam[A[b]] = lamA[b];
      v.residual = std::max(rx.residual, ry);
      if (rx.residual > 1e-6) {
        // The x-part alone decides a failure; the y-surrogate cannot rescue it.
        v.status = SystemStatus::Fails;
        v.reason = "grad_x f is not in -N_X(x): residual " + std::to_string(rx.residual);
      } else if (q == 0 && on_box) {
        v = na("y on the search-box boundary");
      } else if (ry <= 1e-6) {
        v.status = SystemStatus::Holds;
        v.multipliers["nu"] = rx.point;
        if (q) v.multipliers["lambda"] = lam;
      } else {
        v.status = SystemStatus::Fails;
        v.reason = "y is not stationary for the inner problem: residual " + std::to_string(ry);
      }
    }
    cert.systems["nash"] = v;
  }

  std::vector<VectorXd> lambdas;
  std::string sigma_note;
  try {
    GeneratorSet sig = sigma_set(p, x, y, 1, std::nullopt, tol).generators();
    lambdas = sig.vertices;
    if (!sig.rays.empty()) cert.warnings.push_back("Sigma is unbounded; only its vertices are used");
    if (lambdas.empty()) sigma_note = "no KKT multiplier at y";
  } catch (const InfeasiblePoint&) {
    sigma_note = "y is infeasible";
  }
  for (const auto& lam : lambdas)
    for (auto& w : borderline_warnings(lam, tol)) cert.warnings.push_back(w);
  if (!lambdas.empty()) cert.partition = partition_indices(e.g, lambdas.front(), tol);

  // Wolfe systems.
  {
    const bool interior = nf == 0;
    std::string active_key = interior ? "wolfe_interior" : "wolfe_boundary";
    cert.systems[interior ? "wolfe_boundary" : "wolfe_interior"] =
        na(interior ? "x is interior to X" : "x lies on a facet of X");
    if (lambdas.empty()) {
      cert.systems[active_key] = na(sigma_note);
    } else {
      SystemVerdict v;
      v.status = SystemStatus::Fails;
      for (const auto& lam : lambdas) {
        WolfeResult w = check_wolfe_system(p, x, y, lam, !interior, tol);
        if (w.holds) {
          v.status = SystemStatus::Holds;
          v.reason.clear();
          v.residual = w.residual;
          v.multipliers["u"] = w.u;
          if (q) v.multipliers["lambda"] = lam;
          if (nf) v.multipliers["nu"] = w.nu;
          break;
        }
        v.reason = w.reason;
        v.residual = w.residual;
      }
      cert.systems[active_key] = v;
    }
  }

  // MPEC classes, strongest first; stronger multipliers are reused when they fit the weaker class.
  {
    const MpecClass order[] = {MpecClass::S, MpecClass::M, MpecClass::C, MpecClass::Weak};
    std::optional<std::pair<VectorXd, MpecMultipliers>> found;
    for (MpecClass cls : order) {
      std::string key = std::string("mpec_") + to_string(cls);
      if (lambdas.empty()) {
        cert.systems[key] = na(sigma_note);
        continue;
      }
      SystemVerdict v;
      v.status = SystemStatus::Fails;
      auto fill = [&](const VectorXd& lam, const MpecMultipliers& mm, double res) {
        v.status = SystemStatus::Holds;
        v.reason.clear();
        v.residual = res;
        v.multipliers["u"] = mm.u;
        if (q) {
          v.multipliers["alpha"] = mm.alpha;
          v.multipliers["beta"] = mm.beta;
          v.multipliers["lambda"] = lam;
        }
        if (nf) v.multipliers["nu"] = mm.nu;
      };
      if (found) {
        MpecCheck chk = check_mpec_multipliers(p, {x, y, found->first}, found->second, cls, tol);
        if (chk.in_class && chk.residual <= 1e-6) fill(found->first, found->second, chk.residual);
      }
      if (v.status != SystemStatus::Holds) {
        for (const auto& lam : lambdas) {
          try {
            MpecResult r = find_mpec_multipliers(p, {x, y, lam}, cls, tol);
            if (r.holds) {
              fill(lam, r.mult, r.residual);
              found = std::make_pair(lam, r.mult);
              break;
            }
            v.reason = r.reason;
            v.residual = r.residual;
          } catch (const PatternLimitExceeded& ex) {
            v = na(ex.what());
            break;
          } catch (const NotMpecFeasible& ex) {
            v = na(ex.what());
            break;
          }
        }
      }
      cert.systems[key] = v;
    }
  }

  // Carathéodory hull over the solution clusters.
  {
    SystemVerdict v;
    std::vector<VectorXd> grads;
    for (const auto& s : sr.solutions) {
      double f;
      VectorXd fx, fy;
      p.eval_grad(x, s.y, f, fx, fy);
      grads.push_back(fx);
    }
    if (grads.empty()) {
      v = na("no solutions");
    } else {
      bool inside = false;
      VectorXd w;
      double res = 0.0;
      if (nf == 0) {
        HullResult h = hull_membership(VectorXd::Zero(n), grads, n);
        inside = h.inside;
        w = h.weights;
        res = h.residual;
      } else {
        GeneratorSet gs;
        gs.vertices = grads;
        for (const auto& f : facets) gs.rays.push_back(f.sign * unit(n, f.k));
        ConicHullResult h = generator_membership(VectorXd::Zero(n), gs);
        inside = h.inside;
        w = h.vertex_weights;
        res = h.residual;
        if (inside) v.multipliers["nu"] = h.ray_weights;
      }
      v.residual = res;
      if (inside) {
        v.status = SystemStatus::Holds;
        v.multipliers["weights"] = w;
      } else {
        v.status = SystemStatus::Fails;
        v.reason = "0 is not in the hull of grad_x f over the solutions";
      }
    }
    cert.systems["hull_caratheodory"] = v;
  }

  if (!hierarchy_consistent(cert)) throw VerificationFailed("MPEC class hierarchy violated");
  return cert;
}

}  // namespace valfun
