#include "valfun/problem.hpp"

#include <cmath>

#include "valfun/error.hpp"

namespace valfun {

using expr::Expression;

namespace {

std::string xname(int i) { return "x" + std::to_string(i + 1); }
std::string yname(int j) { return "y" + std::to_string(j + 1); }

}  // namespace

ParametricProblem::ParametricProblem(std::string id, int n, int m, Expression f, std::vector<Expression> g,
                                     Box x_domain, Box y_search_box, std::map<std::string, double> params,
                                     Flags flags, SolverConfig solver)
    : id_(std::move(id)),
      n_(n),
      m_(m),
      f_(std::move(f)),
      g_(std::move(g)),
      x_domain_(std::move(x_domain)),
      y_box_(std::move(y_search_box)),
      params_(std::move(params)),
      flags_(flags),
      solver_(solver) {
  if (n_ < 1 || m_ < 1) throw DimensionMismatch("n and m must be at least 1");
  if (x_domain_.empty()) x_domain_.assign(n_, Interval{});
  if (static_cast<int>(x_domain_.size()) != n_) throw DimensionMismatch("x_domain has wrong length");
  if (static_cast<int>(y_box_.size()) != m_) throw DimensionMismatch("y_search_box has wrong length");
  for (const auto& iv : x_domain_)
    if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi) throw FormatError("empty x_domain interval");
  for (const auto& iv : y_box_)
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi))
      throw FormatError("y_search_box must be finite with positive volume");

  std::vector<std::string> names;
  for (int i = 0; i < n_; ++i) names.push_back(xname(i));
  for (int j = 0; j < m_; ++j) names.push_back(yname(j));
  table_ = expr::VariableTable(names);

  auto verify = [&](const Expression& e, const std::string& what) {
    for (const auto& v : expr::variables(e)) {
      auto slot = table_.find(v);
      if (!slot) throw UnknownVariable(v);
      (void)what;
    }
  };
  verify(f_, "f");
  for (const auto& gi : g_) verify(gi, "g");

  if (flags_.separable_xy) {
    std::set<std::string> xs(names.begin(), names.begin() + n_), ys(names.begin() + n_, names.end());
    if (!expr::additively_separable(f_, xs, ys)) throw FormatError("separable_xy set but f mixes x and y");
    for (std::size_t i = 0; i < g_.size(); ++i)
      if (!expr::additively_separable(g_[i], xs, ys))
        throw FormatError("separable_xy set but g" + std::to_string(i + 1) + " mixes x and y");
  }

  const int q = static_cast<int>(g_.size());
  std::vector<Expression> fx(n_), fy(m_);
  for (int i = 0; i < n_; ++i) fx[i] = expr::differentiate(f_, xname(i));
  for (int j = 0; j < m_; ++j) fy[j] = expr::differentiate(f_, yname(j));
  std::vector<std::vector<Expression>> gx(q, std::vector<Expression>(n_)), gy(q, std::vector<Expression>(m_));
  for (int k = 0; k < q; ++k) {
    for (int i = 0; i < n_; ++i) gx[k][i] = expr::differentiate(g_[k], xname(i));
    for (int j = 0; j < m_; ++j) gy[k][j] = expr::differentiate(g_[k], yname(j));
  }

  std::vector<Expression> out{f_};
  out.insert(out.end(), g_.begin(), g_.end());
  p_value_ = expr::Program(out);
  out.insert(out.end(), fy.begin(), fy.end());
  for (int k = 0; k < q; ++k) out.insert(out.end(), gy[k].begin(), gy[k].end());
  p_y_ = expr::Program(out);

  out = {f_};
  out.insert(out.end(), fx.begin(), fx.end());
  out.insert(out.end(), fy.begin(), fy.end());
  p_grad_ = expr::Program(out);

  // Full layout: f, fx, fy, fyy (upper triangle), fxy, then per constraint g,
  // gx, gy, gyy (upper triangle), gxy.
  auto second = [&](std::vector<Expression>& dst, const std::vector<Expression>& dx,
                    const std::vector<Expression>& dy) {
    for (int j = 0; j < m_; ++j)
      for (int k = j; k < m_; ++k) dst.push_back(expr::differentiate(dy[j], yname(k)));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) dst.push_back(expr::differentiate(dx[i], yname(j)));
  };
  out = {f_};
  out.insert(out.end(), fx.begin(), fx.end());
  out.insert(out.end(), fy.begin(), fy.end());
  second(out, fx, fy);
  for (int k = 0; k < q; ++k) {
    out.push_back(g_[k]);
    out.insert(out.end(), gx[k].begin(), gx[k].end());
    out.insert(out.end(), gy[k].begin(), gy[k].end());
    second(out, gx[k], gy[k]);
  }
  p_full_ = expr::Program(out);
}

void ParametricProblem::check_dims(const VectorXd& x, const VectorXd& y) const {
  if (x.size() != n_) throw DimensionMismatch("x has length " + std::to_string(x.size()) + ", expected " +
                                              std::to_string(n_));
  if (y.size() != m_) throw DimensionMismatch("y has length " + std::to_string(y.size()) + ", expected " +
                                              std::to_string(m_));
}

std::vector<double> ParametricProblem::slots(const VectorXd& x, const VectorXd& y) const {
  check_dims(x, y);
  std::vector<double> s(n_ + m_);
  for (int i = 0; i < n_; ++i) s[i] = x[i];
  for (int j = 0; j < m_; ++j) s[n_ + j] = y[j];
  return s;
}

double ParametricProblem::f(const VectorXd& x, const VectorXd& y) const {
  auto s = slots(x, y);
  std::vector<double> out(p_value_.num_outputs());
  p_value_.run(s, out);
  return out[0];
}

VectorXd ParametricProblem::g(const VectorXd& x, const VectorXd& y) const {
  auto s = slots(x, y);
  std::vector<double> out(p_value_.num_outputs());
  p_value_.run(s, out);
  VectorXd g(q());
  for (int k = 0; k < q(); ++k) g[k] = out[1 + k];
  return g;
}

void ParametricProblem::eval_y(const VectorXd& x, const VectorXd& y, double& f, VectorXd& fy, VectorXd& g,
                               MatrixXd& gy) const {
  auto s = slots(x, y);
  const int q = this->q();
  std::vector<double> out(p_y_.num_outputs());
  p_y_.run(s, out);
  f = out[0];
  g.resize(q);
  for (int k = 0; k < q; ++k) g[k] = out[1 + k];
  fy.resize(m_);
  std::size_t at = 1 + q;
  for (int j = 0; j < m_; ++j) fy[j] = out[at++];
  gy.resize(m_, q);
  for (int k = 0; k < q; ++k)
    for (int j = 0; j < m_; ++j) gy(j, k) = out[at++];
}

void ParametricProblem::eval_grad(const VectorXd& x, const VectorXd& y, double& f, VectorXd& fx,
                                  VectorXd& fy) const {
  auto s = slots(x, y);
  std::vector<double> out(p_grad_.num_outputs());
  p_grad_.run(s, out);
  f = out[0];
  fx.resize(n_);
  fy.resize(m_);
  for (int i = 0; i < n_; ++i) fx[i] = out[1 + i];
  for (int j = 0; j < m_; ++j) fy[j] = out[1 + n_ + j];
}

PointEval ParametricProblem::eval_full(const VectorXd& x, const VectorXd& y) const {
  auto s = slots(x, y);
  const int q = this->q();
  std::vector<double> out(p_full_.num_outputs());
  p_full_.run(s, out);
  std::size_t at = 0;
  auto read_block = [&](double& v, VectorXd& dx, VectorXd& dy, MatrixXd& yy, MatrixXd& xy) {
    v = out[at++];
    dx.resize(n_);
    dy.resize(m_);
    for (int i = 0; i < n_; ++i) dx[i] = out[at++];
    for (int j = 0; j < m_; ++j) dy[j] = out[at++];
    yy.resize(m_, m_);
    for (int j = 0; j < m_; ++j)
      for (int k = j; k < m_; ++k) yy(j, k) = yy(k, j) = out[at++];
    xy.resize(n_, m_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) xy(i, j) = out[at++];
  };
  PointEval e;
  read_block(e.f, e.fx, e.fy, e.fyy, e.fxy);
  e.g.resize(q);
  e.gx.resize(n_, q);
  e.gy.resize(m_, q);
  e.gyy.resize(q);
  e.gxy.resize(q);
  for (int k = 0; k < q; ++k) {
    VectorXd dx, dy;
    read_block(e.g[k], dx, dy, e.gyy[k], e.gxy[k]);
    e.gx.col(k) = dx;
    e.gy.col(k) = dy;
  }
  return e;
}

LagrangianEval lagrangian_from(const PointEval& e, const VectorXd& lambda, int r) {
  if (r != 0 && r != 1) throw Error("r must be 0 or 1");
  const auto q = e.g.size();
  if (lambda.size() != q) throw DimensionMismatch("lambda has wrong length");
  LagrangianEval L;
  L.r = r;
  L.value = r * e.f - e.g.dot(lambda);
  L.grad_x = r * e.fx - e.gx * lambda;
  L.grad_y = r * e.fy - e.gy * lambda;
  L.hess_yy = r * e.fyy;
  L.hess_xy = r * e.fxy;
  for (Eigen::Index k = 0; k < q; ++k) {
    L.hess_yy -= lambda[k] * e.gyy[k];
    L.hess_xy -= lambda[k] * e.gxy[k];
  }
  L.g_values = e.g;
  L.jac_y_g = e.gy;
  L.jac_x_g = e.gx;
  return L;
}

LagrangianEval eval_lagrangian(const ParametricProblem& p, const Point& pt, int r) {
  VectorXd lambda = pt.lambda.value_or(VectorXd::Zero(p.q()));
  return lagrangian_from(p.eval_full(pt.x, pt.y), lambda, r);
}

FdReport fd_check(const ParametricProblem& p, const Point& pt) {
  FdReport rep;
  const int n = p.n(), m = p.m(), q = p.q();
  const double h1 = 1e-5, h2 = 1e-4;
  PointEval e;
  try {
    e = p.eval_full(pt.x, pt.y);
  } catch (const std::exception& ex) {
    rep.worst = std::string("evaluation failed: ") + ex.what();
    return rep;
  }
  // Stacked variable vector (x, y); component c of the output: 0 is f, 1+k is g_k.
  auto value = [&](const VectorXd& z, int c) {
    VectorXd x = z.head(n), y = z.tail(m);
    return c == 0 ? p.f(x, y) : p.g(x, y)[c - 1];
  };
  VectorXd z(n + m);
  z << pt.x, pt.y;
  auto rel = [](double sym, double fd) { return std::abs(sym - fd) / std::max(1.0, std::abs(sym)); };
  double worst = -1.0;
  auto note = [&](double d, double& slot, const std::string& what) {
    slot = std::max(slot, d);
    if (d > worst) {
      worst = d;
      rep.worst = what;
    }
  };
  try {
    for (int c = 0; c <= q; ++c) {
      std::string fn = c == 0 ? "f" : "g" + std::to_string(c);
      VectorXd grad(n + m);
      if (c == 0) grad << e.fx, e.fy;
      else grad << e.gx.col(c - 1), e.gy.col(c - 1);
      for (int a = 0; a < n + m; ++a) {
        VectorXd zp = z, zm = z;
        zp[a] += h1;
        zm[a] -= h1;
        double fd = (value(zp, c) - value(zm, c)) / (2 * h1);
        note(rel(grad[a], fd), rep.max_first, "d" + fn + "/d" + p.table().name(a));
      }
      const MatrixXd& yy = c == 0 ? e.fyy : e.gyy[c - 1];
      const MatrixXd& xy = c == 0 ? e.fxy : e.gxy[c - 1];
      auto mixed = [&](int a, int b) {
        auto at = [&](double sa, double sb) {
          VectorXd w = z;
          w[a] += sa * h2;
          w[b] += sb * h2;
          return value(w, c);
        };
        return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h2 * h2);
      };
      for (int j = 0; j < m; ++j)
        for (int k = j; k < m; ++k)
          note(rel(yy(j, k), mixed(n + j, n + k)), rep.max_second,
               "d2" + fn + "/d" + p.table().name(n + j) + "d" + p.table().name(n + k));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          note(rel(xy(i, j), mixed(i, n + j)), rep.max_second,
               "d2" + fn + "/d" + p.table().name(i) + "d" + p.table().name(n + j));
    }
  } catch (const std::exception& ex) {
    rep.worst = std::string("evaluation failed near point: ") + ex.what();
    rep.pass = false;
    return rep;
  }
  rep.pass = rep.max_first <= 1e-5 && rep.max_second <= 1e-5;
  return rep;
}

}  // namespace valfun
