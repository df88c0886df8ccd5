#pragma once

// Test fixtures shared by the unit suites and the acceptance binary.

#include <cstdio>
#include <random>
#include <string>

#include "valfun/linalg.hpp"
#include "valfun/problem.hpp"

namespace fixture {

using valfun::MatrixXd;
using valfun::VectorXd;

inline VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(v.size());
  int i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

/// x̄ = s − z for the bundled GAN parameters.
inline VectorXd gan_xbar() { return vec({0.5 - 0.2, 1.5 - (-0.3)}); }

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "(%.17g)", v);
  return buf;
}

/// A concave-in-y quadratic with linear constraints, built around a known Wolfe certificate:
/// (y, λ) is a KKT point of the inner problem at x and u solves the Wolfe system there.
struct QuadInstance {
  std::string document;
  VectorXd x, y, lambda, u;
  int biactive = 0;
};

inline QuadInstance random_concave_quadratic(std::mt19937_64& rng, int trial) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = 1 + trial % 2, m = 1 + trial % 3, q = trial % 4;
  const int r = static_cast<int>(U(rng) * (m + 1));  // rank of −Q, possibly deficient
  MatrixXd R(r, m), B(m, n), A(q, m), Ex(q, n);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < m; ++j) R(i, j) = N(rng);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < n; ++k) B(j, k) = N(rng);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < m; ++j) A(i, j) = N(rng);
    for (int k = 0; k < n; ++k) Ex(i, k) = 0.5 * N(rng);
  }
  MatrixXd Q = r ? MatrixXd(-R.transpose() * R) : MatrixXd::Zero(m, m);
  QuadInstance inst;
  inst.x = VectorXd(n);
  inst.y = VectorXd(m);
  for (int k = 0; k < n; ++k) inst.x[k] = N(rng);
  for (int j = 0; j < m; ++j) inst.y[j] = N(rng);
  inst.lambda = VectorXd::Zero(q);
  VectorXd b(q), margin = VectorXd::Zero(q);
  std::vector<int> kind(q);  // 0 inactive, 1 active with λ > 0, 2 biactive
  for (int i = 0; i < q; ++i) {
    double t = U(rng);
    kind[i] = t < 0.3 ? 0 : t < 0.65 ? 1 : 2;
    double base = A.row(i).dot(inst.y) + Ex.row(i).dot(inst.x);
    if (kind[i] == 0) {
      margin[i] = 0.5 + U(rng);
      b[i] = base + margin[i];
    } else {
      b[i] = base;
    }
    if (kind[i] == 1) inst.lambda[i] = 0.2 + U(rng);
    if (kind[i] == 2) ++inst.biactive;
  }
  // c makes ∇_y L vanish at (y, λ).
  VectorXd c = A.transpose() * inst.lambda - Q * inst.y - B * inst.x;

  // u in null(Q) ∩ {a_i u = 0 on the support}, signed for the biactive rows, scaled for the inactive ones.
  MatrixXd Z(m + q, m);
  int rows = 0;
  Z.topRows(m) = Q;
  rows = m;
  for (int i = 0; i < q; ++i)
    if (kind[i] == 1) Z.row(rows++) = A.row(i);
  MatrixXd Nul = valfun::null_space(Z.topRows(rows));
  inst.u = VectorXd::Zero(m);
  if (Nul.cols() > 0) {
    VectorXd w(Nul.cols());
    for (int k = 0; k < w.size(); ++k) w[k] = N(rng);
    VectorXd v = Nul * w;
    auto ok = [&](const VectorXd& cand) {
      for (int i = 0; i < q; ++i)
        if (kind[i] == 2 && -A.row(i).dot(cand) < 0) return false;
      return true;
    };
    if (!ok(v)) v = -v;
    if (ok(v)) {
      double scale = 1.0;
      for (int i = 0; i < q; ++i)
        if (kind[i] == 0) {
          double s = std::abs(A.row(i).dot(v));
          if (s > 0) scale = std::min(scale, 0.5 * margin[i] / s);
        }
      inst.u = scale * v;
    }
  }
  // p makes ∇_x L + ∇²_xy L u vanish.
  VectorXd p = -B.transpose() * inst.y + Ex.transpose() * inst.lambda - B.transpose() * inst.u;

  auto xs = [](int k) { return "x" + std::to_string(k + 1); };
  auto ys = [](int j) { return "y" + std::to_string(j + 1); };
  std::string f;
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l) f += " + " + num(0.5 * Q(j, l)) + "*" + ys(j) + "*" + ys(l);
  for (int j = 0; j < m; ++j) {
    f += " + " + ys(j) + "*(" + num(c[j]);
    for (int k = 0; k < n; ++k) f += " + " + num(B(j, k)) + "*" + xs(k);
    f += ")";
  }
  for (int k = 0; k < n; ++k) f += " + " + num(p[k]) + "*" + xs(k);
  std::string doc = "[meta]\nid = random_quadratic\n[dims]\nn = " + std::to_string(n) + "\nm = " +
                    std::to_string(m) + "\nq = " + std::to_string(q) + "\n[objective]\nf = \"" + f.substr(3) +
                    "\"\n";
  if (q) {
    doc += "[constraints]\n";
    for (int i = 0; i < q; ++i) {
      std::string g = num(-b[i]);
      for (int j = 0; j < m; ++j) g += " + " + num(A(i, j)) + "*" + ys(j);
      for (int k = 0; k < n; ++k) g += " + " + num(Ex(i, k)) + "*" + xs(k);
      doc += "g" + std::to_string(i + 1) + " = \"" + g + "\"\n";
    }
  }
  doc += "[y_search_box]\n";
  for (int j = 0; j < m; ++j) doc += ys(j) + " = \"" + std::to_string(inst.y[j] - 10) + "," +
                                     std::to_string(inst.y[j] + 10) + "\"\n";
  doc += "[flags]\nconcave_in_y = true\n";
  inst.document = doc;
  return inst;
}

}  // namespace fixture
