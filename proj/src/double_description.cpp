#include <algorithm>
#include <cmath>

#include "valfun/error.hpp"
#include "valfun/linalg.hpp"
#include "valfun/polyhedra.hpp"

namespace valfun {

namespace {

// Extreme rays of the pointed cone {x : K x <= 0} by incremental double description.
std::vector<VectorXd> cone_rays(const MatrixXd& K, double tol) {
  const Eigen::Index dc = K.cols();
  const Eigen::Index rows = K.rows();

  // Seed with dc independent rows; their cone is simplicial.
  std::vector<Eigen::Index> seed, rest;
  MatrixXd chosen(0, dc);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(seed.size()) < dc) {
      MatrixXd trial(chosen.rows() + 1, dc);
      trial << chosen, K.row(i);
      if (rank(trial, 1e-9) == trial.rows()) {
        chosen = trial;
        seed.push_back(i);
        continue;
      }
    }
    rest.push_back(i);
  }
  if (static_cast<Eigen::Index>(seed.size()) < dc) throw Error("double description: cone is not pointed");

  MatrixXd inv = chosen.inverse();
  std::vector<VectorXd> R;
  for (Eigen::Index j = 0; j < dc; ++j) {
    VectorXd r = -inv.col(j);
    R.push_back(r / r.norm());
  }
  std::vector<Eigen::Index> processed = seed;

  for (Eigen::Index i : rest) {
    const Eigen::RowVectorXd a = K.row(i);
    std::vector<double> s(R.size());
    std::vector<std::size_t> pos, neg, zero;
    for (std::size_t k = 0; k < R.size(); ++k) {
      s[k] = a.dot(R[k]);
      if (s[k] > tol) pos.push_back(k);
      else if (s[k] < -tol) neg.push_back(k);
      else zero.push_back(k);
    }
    if (pos.empty()) {
      processed.push_back(i);
      continue;
    }
    // Tight sets over processed rows, for the adjacency test.
    auto tight = [&](const VectorXd& r) {
      std::vector<Eigen::Index> t;
      for (Eigen::Index p : processed)
        if (std::abs(K.row(p).dot(r)) <= tol) t.push_back(p);
      return t;
    };
    std::vector<std::vector<Eigen::Index>> tight_sets(R.size());
    for (std::size_t k : pos) tight_sets[k] = tight(R[k]);
    for (std::size_t k : neg) tight_sets[k] = tight(R[k]);
    std::vector<VectorXd> next;
    for (std::size_t k : neg) next.push_back(R[k]);
    for (std::size_t k : zero) next.push_back(R[k]);
    for (std::size_t p : pos) {
      for (std::size_t q : neg) {
        std::vector<Eigen::Index> common;
        std::set_intersection(tight_sets[p].begin(), tight_sets[p].end(), tight_sets[q].begin(),
                              tight_sets[q].end(), std::back_inserter(common));
        if (static_cast<Eigen::Index>(common.size()) < dc - 2) continue;
        MatrixXd Z(common.size(), dc);
        for (std::size_t c = 0; c < common.size(); ++c) Z.row(c) = K.row(common[c]);
        if (rank(Z, 1e-9) != dc - 2) continue;
        VectorXd r = (-s[q]) * R[p] + s[p] * R[q];
        double nr = r.norm();
        if (nr <= tol) continue;
        next.push_back(r / nr);
      }
    }
    R = std::move(next);
    processed.push_back(i);
    std::sort(processed.begin(), processed.end());
  }
  return R;
}

void dedupe(std::vector<VectorXd>& pts, double tol) {
  std::vector<VectorXd> out;
  for (auto& p : pts) {
    bool dup = false;
    for (const auto& o : out)
      if ((o - p).lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, p.lpNorm<Eigen::Infinity>())) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(p);
  }
  pts = std::move(out);
}

}  // namespace

GeneratorSet enumerate_generators(const Polyhedron& poly, double tol, double eq_tol) {
  if (poly.dim > 8) throw DimensionTooLarge("enumerate_generators supports dim <= 8, got " + std::to_string(poly.dim));
  const int d = poly.dim;
  GeneratorSet out;

  // Parametrize the affine hull of the equalities: z = z0 + N w.
  VectorXd z0 = VectorXd::Zero(d);
  MatrixXd N = MatrixXd::Identity(d, d);
  if (poly.num_eq() > 0) {
    z0 = min_norm_solve(poly.E, poly.c);
    double scale = 1.0 + poly.c.cwiseAbs().maxCoeff();
    if ((poly.E * z0 - poly.c).cwiseAbs().maxCoeff() > eq_tol * scale) return out;
    N = null_space(poly.E);
  }
  const Eigen::Index p = N.cols();

  MatrixXd A1 = poly.A * N;
  VectorXd b1 = poly.b - poly.A * z0;
  // Normalize rows, drop vacuous ones, detect contradictory ones.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < A1.rows(); ++i) {
    double nr = A1.row(i).norm();
    if (nr <= 1e-12 * std::max(1.0, poly.A.row(i).norm())) {
      if (b1[i] < -1e-8 * std::max(1.0, std::abs(poly.b[i]))) return out;
      continue;
    }
    A1.row(i) /= nr;
    b1[i] /= nr;
    keep.push_back(i);
  }
  MatrixXd A2(keep.size(), p);
  VectorXd b2(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    A2.row(k) = A1.row(keep[k]);
    b2[k] = b1[keep[k]];
  }

  // Split off the lineality space.
  MatrixXd L = keep.empty() ? MatrixXd::Identity(p, p) : null_space(A2);
  MatrixXd W = keep.empty() ? MatrixXd(p, 0) : row_space(A2);
  for (Eigen::Index j = 0; j < L.cols(); ++j) {
    VectorXd r = N * L.col(j);
    r.normalize();
    out.rays.push_back(r);
    out.rays.push_back(-r);
  }
  const Eigen::Index pp = W.cols();
  if (pp == 0) {
    // Everything is lineality: feasible iff all right-hand sides are nonnegative.
    for (Eigen::Index k = 0; k < b2.size(); ++k)
      if (b2[k] < -1e-8) {
        out.rays.clear();
        return out;
      }
    out.vertices.push_back(z0);
    return out;
  }
  MatrixXd A3 = A2 * W;

  // Homogenized cone {(v, t) : A3 v - b2 t <= 0, -t <= 0}.
  MatrixXd K(A3.rows() + 1, pp + 1);
  K.topLeftCorner(A3.rows(), pp) = A3;
  K.topRightCorner(A3.rows(), 1) = -b2;
  K.row(A3.rows()).setZero();
  K(A3.rows(), pp) = -1.0;
  for (Eigen::Index i = 0; i < K.rows(); ++i) K.row(i).normalize();

  for (const VectorXd& r : cone_rays(K, tol)) {
    double t = r[pp];
    VectorXd v = W * r.head(pp);
    if (t > tol) {
      out.vertices.push_back(z0 + N * (v / t));
    } else {
      VectorXd dir = N * v;
      double nr = dir.norm();
      if (nr > tol) out.rays.push_back(dir / nr);
    }
  }
  if (out.vertices.empty()) {
    out.rays.clear();
    return out;
  }
  dedupe(out.vertices, 1e-9);
  dedupe(out.rays, 1e-9);

  // Cross-validation against the H-representation.
  double scale = 1.0;
  if (poly.num_ineq()) scale = std::max(scale, poly.b.cwiseAbs().maxCoeff());
  if (poly.num_eq()) scale = std::max(scale, poly.c.cwiseAbs().maxCoeff());
  for (const auto& v : out.vertices)
    if (poly.violation(v) > std::max(1e-7, 10 * eq_tol) * scale * std::max(1.0, v.lpNorm<Eigen::Infinity>()))
      throw VerificationFailed("double description produced an infeasible vertex");
  for (const auto& r : out.rays)
    if (poly.ray_violation(r) > 1e-7) throw VerificationFailed("double description produced an infeasible ray");
  return out;
}

}  // namespace valfun
