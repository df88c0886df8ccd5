#include <algorithm>
#include <cmath>
#include <limits>

#include "valfun/error.hpp"
#include "valfun/linalg.hpp"
#include "valfun/polyhedra.hpp"

namespace valfun {

Polyhedron::Polyhedron(int d) : dim(d), A(0, d), b(0), E(0, d), c(0) {}

void Polyhedron::add_le(const VectorXd& row, double rhs) {
  if (row.size() != dim) throw DimensionMismatch("polyhedron row has wrong length");
  A.conservativeResize(A.rows() + 1, dim);
  A.row(A.rows() - 1) = row.transpose();
  b.conservativeResize(b.size() + 1);
  b[b.size() - 1] = rhs;
}

void Polyhedron::add_eq(const VectorXd& row, double rhs) {
  if (row.size() != dim) throw DimensionMismatch("polyhedron row has wrong length");
  E.conservativeResize(E.rows() + 1, dim);
  E.row(E.rows() - 1) = row.transpose();
  c.conservativeResize(c.size() + 1);
  c[c.size() - 1] = rhs;
}

double Polyhedron::violation(const VectorXd& z) const {
  double v = 0.0;
  if (A.rows()) v = std::max(v, (A * z - b).maxCoeff());
  if (E.rows()) v = std::max(v, (E * z - c).cwiseAbs().maxCoeff());
  return v;
}

double Polyhedron::ray_violation(const VectorXd& r) const {
  double v = 0.0;
  if (A.rows()) v = std::max(v, (A * r).maxCoeff());
  if (E.rows()) v = std::max(v, (E * r).cwiseAbs().maxCoeff());
  return v;
}

namespace {

constexpr long kPivotGuard = 1000000;
constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-10;

class Tableau {
 public:
  Tableau(const Polyhedron& p) : d_(p.dim), k_(p.num_ineq()), l_(p.num_eq()) {
    rows_ = k_ + l_;
    n_std_ = 2 * d_ + k_;
    flip_.assign(rows_, 1.0);
    std_.resize(rows_, n_std_);
    std_.setZero();
    rhs_.resize(rows_);
    for (int i = 0; i < rows_; ++i) {
      Eigen::RowVectorXd a = i < k_ ? Eigen::RowVectorXd(p.A.row(i)) : Eigen::RowVectorXd(p.E.row(i - k_));
      double r = i < k_ ? p.b[i] : p.c[i - k_];
      std_.block(i, 0, 1, d_) = a;
      std_.block(i, d_, 1, d_) = -a;
      if (i < k_) std_(i, 2 * d_ + i) = 1.0;
      if (r < 0) {
        flip_[i] = -1.0;
        std_.row(i) *= -1.0;
        r = -r;
      }
      rhs_[i] = r;
    }
    scale_ = 1.0 + (rows_ ? rhs_.cwiseAbs().maxCoeff() : 0.0);
    // One artificial per row lacking a ready +1 slack.
    basis_.assign(rows_, -1);
    int n_art = 0;
    for (int i = 0; i < rows_; ++i)
      if (!(i < k_ && flip_[i] > 0)) ++n_art;
    cols_ = n_std_ + n_art;
    T_.setZero(rows_, cols_ + 1);
    T_.leftCols(n_std_) = std_;
    T_.col(cols_) = rhs_;
    int a = n_std_;
    for (int i = 0; i < rows_; ++i) {
      if (i < k_ && flip_[i] > 0) {
        basis_[i] = 2 * d_ + i;
      } else {
        T_(i, a) = 1.0;
        basis_[i] = a++;
      }
    }
    allowed_.assign(cols_, true);
    alive_.assign(rows_, true);
  }

  // Returns false on an unbounded direction (entering column stored in unbounded_col_).
  bool optimize(const VectorXd& cost, long& pivots) {
    red_.resize(cols_ + 1);
    red_.setZero();
    for (int j = 0; j < cols_; ++j) red_[j] = cost[j];
    for (int r = 0; r < rows_; ++r)
      if (alive_[r]) red_ -= cost[basis_[r]] * T_.row(r).transpose();
    while (true) {
      int enter = -1;
      for (int j = 0; j < cols_; ++j)
        if (allowed_[j] && red_[j] < -kCostEps) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        if (!alive_[r] || T_(r, enter) <= kPivotEps) continue;
        double ratio = std::max(0.0, T_(r, cols_)) / T_(r, enter);
        if (leave < 0 || ratio < best - 1e-12 * (1.0 + best)) {
          best = ratio;
          leave = r;
        } else if (ratio <= best + 1e-12 * (1.0 + best) && basis_[r] < basis_[leave]) {
          leave = r;
        }
      }
      if (leave < 0) {
        unbounded_col_ = enter;
        return false;
      }
      pivot(leave, enter);
      if (++pivots > kPivotGuard) throw CycleGuardExceeded("simplex exceeded the pivot guard");
    }
  }

  void pivot(int r, int j) {
    T_.row(r) /= T_(r, j);
    for (int i = 0; i < rows_; ++i)
      if (i != r && alive_[i] && T_(i, j) != 0.0) T_.row(i) -= T_(i, j) * T_.row(r);
    if (red_.size() == cols_ + 1 && red_[j] != 0.0) red_ -= red_[j] * T_.row(r).transpose();
    basis_[r] = j;
  }

  double infeasibility() const {
    double s = 0.0;
    for (int r = 0; r < rows_; ++r)
      if (alive_[r] && basis_[r] >= n_std_) s += std::abs(T_(r, cols_));
    return s;
  }

  void expel_artificials() {
    for (int r = 0; r < rows_; ++r) {
      if (!alive_[r] || basis_[r] < n_std_) continue;
      int best = -1;
      double mag = 1e-9;
      for (int j = 0; j < n_std_; ++j)
        if (std::abs(T_(r, j)) > mag) {
          mag = std::abs(T_(r, j));
          best = j;
        }
      if (best >= 0) {
        red_.resize(0);
        pivot(r, best);
      } else {
        alive_[r] = false;  // redundant row
      }
    }
    for (int j = n_std_; j < cols_; ++j) allowed_[j] = false;
  }

  VectorXd phase1_cost() const {
    VectorXd c = VectorXd::Zero(cols_);
    for (int j = n_std_; j < cols_; ++j) c[j] = 1.0;
    return c;
  }

  VectorXd phase2_cost(const VectorXd& obj) const {
    VectorXd c = VectorXd::Zero(cols_);
    c.head(d_) = -obj;
    c.segment(d_, d_) = obj;
    return c;
  }

  // Basic solution recomputed from the original data for accuracy.
  VectorXd standard_solution() const {
    std::vector<int> live;
    for (int r = 0; r < rows_; ++r)
      if (alive_[r]) live.push_back(r);
    VectorXd w = VectorXd::Zero(cols_);
    if (live.empty()) return w;
    MatrixXd B(live.size(), live.size());
    VectorXd rhs(live.size());
    for (std::size_t a = 0; a < live.size(); ++a) {
      rhs[a] = rhs_[live[a]];
      for (std::size_t c = 0; c < live.size(); ++c) B(a, c) = column(basis_[live[c]], live[a]);
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(B);
    VectorXd xb = qr.isInvertible() ? VectorXd(qr.solve(rhs)) : VectorXd::Zero(live.size());
    for (std::size_t c = 0; c < live.size(); ++c) {
      double v = qr.isInvertible() ? xb[c] : T_(live[c], cols_);
      w[basis_[live[c]]] = std::max(0.0, v);
    }
    return w;
  }

  VectorXd to_z(const VectorXd& w) const { return w.head(d_) - w.segment(d_, d_); }

  VectorXd ray() const {
    VectorXd w = VectorXd::Zero(cols_);
    w[unbounded_col_] = 1.0;
    for (int r = 0; r < rows_; ++r)
      if (alive_[r]) w[basis_[r]] -= T_(r, unbounded_col_);
    return to_z(w);
  }

  // Multipliers of the original rows for  max obj^T z.
  void duals(const VectorXd& cost, VectorXd& y, VectorXd& w) const {
    y = VectorXd::Zero(k_);
    w = VectorXd::Zero(l_);
    std::vector<int> live;
    for (int r = 0; r < rows_; ++r)
      if (alive_[r]) live.push_back(r);
    if (live.empty()) return;
    MatrixXd Bt(live.size(), live.size());
    VectorXd cb(live.size());
    for (std::size_t c = 0; c < live.size(); ++c) {
      cb[c] = cost[basis_[live[c]]];
      for (std::size_t a = 0; a < live.size(); ++a) Bt(c, a) = column(basis_[live[c]], live[a]);
    }
    VectorXd pi = Eigen::ColPivHouseholderQR<MatrixXd>(Bt).solve(cb);
    for (std::size_t a = 0; a < live.size(); ++a) {
      int r = live[a];
      double v = -flip_[r] * pi[a];
      if (r < k_) y[r] = std::max(0.0, v);
      else w[r - k_] = v;
    }
  }

  double scale() const { return scale_; }

 private:
  double column(int j, int row) const {
    if (j < n_std_) return std_(row, j);
    // Artificial columns are unit vectors in their original row.
    int a = n_std_;
    for (int i = 0; i < rows_; ++i) {
      if (i < k_ && flip_[i] > 0) continue;
      if (a == j) return i == row ? 1.0 : 0.0;
      ++a;
    }
    return 0.0;
  }

  int d_, k_, l_, rows_, n_std_, cols_;
  std::vector<double> flip_;
  MatrixXd std_;
  VectorXd rhs_;
  MatrixXd T_;
  VectorXd red_;
  std::vector<int> basis_;
  std::vector<bool> allowed_, alive_;
  int unbounded_col_ = -1;
  double scale_ = 1.0;
};

}  // namespace

LpResult lp_solve(const Polyhedron& poly, const std::optional<VectorXd>& objective) {
  if (objective && objective->size() != poly.dim) throw DimensionMismatch("objective has wrong length");
  LpResult res;
  Tableau t(poly);
  t.optimize(t.phase1_cost(), res.pivots);
  if (t.infeasibility() > 1e-9 * t.scale()) {
    res.status = LpStatus::Empty;
    return res;
  }
  t.expel_artificials();
  if (!objective) {
    res.status = LpStatus::Feasible;
    res.point = t.to_z(t.standard_solution());
    return res;
  }
  VectorXd cost = t.phase2_cost(*objective);
  if (!t.optimize(cost, res.pivots)) {
    res.status = LpStatus::Unbounded;
    res.point = t.to_z(t.standard_solution());
    VectorXd r = t.ray();
    double nr = r.norm();
    res.ray = nr > 0 ? VectorXd(r / nr) : r;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.point = t.to_z(t.standard_solution());
  res.value = objective->dot(res.point);
  t.duals(cost, res.dual_ineq, res.dual_eq);
  return res;
}

ResidualResult min_residual(const Polyhedron& poly, bool relax_inequalities) {
  const int d = poly.dim;
  Polyhedron aug(d + 1);
  auto row = [&](const Eigen::RowVectorXd& a, double tcoef) {
    VectorXd r(d + 1);
    r.head(d) = a.transpose();
    r[d] = tcoef;
    return r;
  };
  for (int i = 0; i < poly.num_ineq(); ++i) aug.add_le(row(poly.A.row(i), relax_inequalities ? -1.0 : 0.0), poly.b[i]);
  for (int i = 0; i < poly.num_eq(); ++i) {
    aug.add_le(row(poly.E.row(i), -1.0), poly.c[i]);
    aug.add_le(row(-poly.E.row(i), -1.0), -poly.c[i]);
  }
  VectorXd tt = VectorXd::Zero(d + 1);
  tt[d] = -1.0;
  aug.add_le(tt, 0.0);
  LpResult lp = lp_solve(aug, tt);
  ResidualResult out;
  if (lp.status != LpStatus::Optimal) {
    out.point = VectorXd::Zero(d);
    out.residual = std::numeric_limits<double>::infinity();
    return out;
  }
  out.point = lp.point.head(d);
  out.residual = poly.violation(out.point);
  return out;
}

ResidualResult solve_system(const Polyhedron& poly) {
  ResidualResult best = min_residual(poly, false);
  if (!std::isfinite(best.residual)) return best;
  for (int pass = 0; pass < 3 && best.residual > 0.0; ++pass) {
    const VectorXd& z = best.point;
    std::vector<int> tight;
    for (int i = 0; i < poly.num_ineq(); ++i)
      if (poly.b[i] - poly.A.row(i).dot(z) <= 1e-9 * std::max(1.0, std::abs(poly.b[i]))) tight.push_back(i);
    MatrixXd M(poly.num_eq() + tight.size(), poly.dim);
    VectorXd rhs(M.rows());
    if (poly.num_eq()) {
      M.topRows(poly.num_eq()) = poly.E;
      rhs.head(poly.num_eq()) = poly.c;
    }
    for (std::size_t k = 0; k < tight.size(); ++k) {
      M.row(poly.num_eq() + k) = poly.A.row(tight[k]);
      rhs[poly.num_eq() + k] = poly.b[tight[k]];
    }
    if (M.rows() == 0) break;
    VectorXd z2 = z + min_norm_solve(M, rhs - M * z, 1e-12);
    double v2 = poly.violation(z2);
    if (!(v2 < best.residual)) break;
    best.point = z2;
    best.residual = v2;
  }
  return best;
}

}  // namespace valfun
