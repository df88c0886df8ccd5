#include <algorithm>
#include <cmath>
#include <limits>

#include "valfun/error.hpp"
#include "valfun/linalg.hpp"
#include "valfun/polyhedra.hpp"

namespace valfun {

namespace {

// Drops generators from a convex combination until at most `cap` remain,
// moving along null vectors of [v_i; 1] (Caratheodory).
void caratheodory_reduce(const std::vector<VectorXd>& gens, VectorXd& w, std::size_t cap) {
  const Eigen::Index d = gens.front().size();
  while (true) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (w[i] > 0.0) support.push_back(i);
    if (support.size() <= cap) return;
    MatrixXd M(d + 1, support.size());
    for (std::size_t k = 0; k < support.size(); ++k) {
      M.col(k).head(d) = gens[support[k]];
      M(d, k) = 1.0;
    }
    MatrixXd Nul = null_space(M, 1e-10);
    if (Nul.cols() == 0) return;
    VectorXd mu = Nul.col(0);
    if (mu.maxCoeff() <= 0.0) mu = -mu;
    double theta = std::numeric_limits<double>::infinity();
    std::size_t hit = 0;
    for (std::size_t k = 0; k < support.size(); ++k)
      if (mu[k] > 1e-14) {
        double r = w[support[k]] / mu[k];
        if (r < theta) {
          theta = r;
          hit = k;
        }
      }
    for (std::size_t k = 0; k < support.size(); ++k) w[support[k]] = std::max(0.0, w[support[k]] - theta * mu[k]);
    w[support[hit]] = 0.0;
    double s = w.sum();
    if (s > 0) w /= s;
  }
}

}  // namespace

HullResult hull_membership(const VectorXd& point, const std::vector<VectorXd>& generators, std::optional<int> n_cap,
                           double tol) {
  if (generators.empty()) throw Error("hull_membership needs at least one generator");
  const Eigen::Index d = point.size();
  const int k = static_cast<int>(generators.size());
  for (const auto& g : generators)
    if (g.size() != d) throw DimensionMismatch("generator has wrong length");
  Polyhedron P(k);
  for (int i = 0; i < k; ++i) {
    VectorXd e = VectorXd::Zero(k);
    e[i] = -1.0;
    P.add_le(e, 0.0);
  }
  P.add_eq(VectorXd::Ones(k), 1.0);
  for (Eigen::Index r = 0; r < d; ++r) {
    VectorXd row(k);
    for (int i = 0; i < k; ++i) row[i] = generators[i][r];
    P.add_eq(row, point[r]);
  }
  ResidualResult rr = min_residual(P, false);
  HullResult out;
  out.residual = rr.residual;
  out.inside = rr.residual <= tol;
  if (!out.inside) return out;
  VectorXd w = rr.point.cwiseMax(0.0);
  w /= w.sum();
  if (n_cap) caratheodory_reduce(generators, w, static_cast<std::size_t>(*n_cap + 1));
  out.weights = w;
  VectorXd combo = VectorXd::Zero(d);
  for (int i = 0; i < k; ++i) combo += w[i] * generators[i];
  out.residual = d ? (combo - point).cwiseAbs().maxCoeff() : 0.0;
  out.inside = out.residual <= tol;
  return out;
}

ConicHullResult generator_membership(const VectorXd& point, const GeneratorSet& gens, double tol) {
  ConicHullResult out;
  if (gens.vertices.empty()) {
    out.residual = std::numeric_limits<double>::infinity();
    return out;
  }
  const Eigen::Index d = point.size();
  const int kv = static_cast<int>(gens.vertices.size()), kr = static_cast<int>(gens.rays.size());
  const int k = kv + kr;
  Polyhedron P(k);
  for (int i = 0; i < k; ++i) {
    VectorXd e = VectorXd::Zero(k);
    e[i] = -1.0;
    P.add_le(e, 0.0);
  }
  VectorXd sum = VectorXd::Zero(k);
  sum.head(kv).setOnes();
  P.add_eq(sum, 1.0);
  for (Eigen::Index r = 0; r < d; ++r) {
    VectorXd row(k);
    for (int i = 0; i < kv; ++i) row[i] = gens.vertices[i][r];
    for (int i = 0; i < kr; ++i) row[kv + i] = gens.rays[i][r];
    P.add_eq(row, point[r]);
  }
  ResidualResult rr = min_residual(P, false);
  out.residual = rr.residual;
  out.inside = rr.residual <= tol;
  if (std::isfinite(rr.residual)) {
    out.vertex_weights = rr.point.head(kv);
    out.ray_weights = rr.point.tail(kr);
  }
  return out;
}

bool same_point_sets(std::vector<VectorXd> a, std::vector<VectorXd> b, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& p : a) {
    bool found = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j] || b[j].size() != p.size()) continue;
      if ((b[j] - p).lpNorm<Eigen::Infinity>() <= tol) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace valfun
