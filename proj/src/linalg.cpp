#include "valfun/linalg.hpp"

#include <algorithm>
#include <vector>

namespace valfun {

namespace {

Eigen::JacobiSVD<MatrixXd> full_svd(const MatrixXd& M) {
  return Eigen::JacobiSVD<MatrixXd>(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

constexpr double kAbsFloor = 1e-12;

int count_above(const VectorXd& sv, double tol) {
  if (sv.size() == 0) return 0;
  double top = sv.maxCoeff();
  if (top == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * top && sv[i] > kAbsFloor) ++r;
  return r;
}

}  // namespace

int rank(const MatrixXd& M, double tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  return count_above(svd.singularValues(), tol);
}

MatrixXd null_space(const MatrixXd& M, double tol) {
  const Eigen::Index d = M.cols();
  if (M.rows() == 0) return MatrixXd::Identity(d, d);
  if (d == 0) return MatrixXd(0, 0);
  auto svd = full_svd(M);
  int r = count_above(svd.singularValues(), tol);
  return svd.matrixV().rightCols(d - r);
}

MatrixXd row_space(const MatrixXd& M, double tol) {
  const Eigen::Index d = M.cols();
  if (M.rows() == 0 || d == 0) return MatrixXd(d, 0);
  auto svd = full_svd(M);
  int r = count_above(svd.singularValues(), tol);
  return svd.matrixV().leftCols(r);
}

VectorXd min_norm_solve(const MatrixXd& M, const VectorXd& rhs, double tol) {
  if (M.cols() == 0) return VectorXd(0);
  if (M.rows() == 0) return VectorXd::Zero(M.cols());
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(M);
  cod.setThreshold(tol);
  return cod.solve(rhs);
}

VectorXd nnls(const MatrixXd& M, const VectorXd& rhs, int max_iter) {
  const Eigen::Index n = M.cols();
  VectorXd z = VectorXd::Zero(n);
  if (n == 0) return z;
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff()) * std::max<Eigen::Index>(n, M.rows());
  for (int it = 0; it < max_iter; ++it) {
    VectorXd w = M.transpose() * (rhs - M * z);
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    if (best < 0) break;
    passive[best] = true;
    while (true) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j]) idx.push_back(j);
      MatrixXd Mp(M.rows(), idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) Mp.col(k) = M.col(idx[k]);
      VectorXd s = min_norm_solve(Mp, rhs);
      bool ok = true;
      for (std::size_t k = 0; k < idx.size(); ++k)
        if (s[k] <= 0.0) ok = false;
      if (ok) {
        z.setZero();
        for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = s[k];
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < idx.size(); ++k)
        if (s[k] <= 0.0) {
          double denom = z[idx[k]] - s[k];
          if (denom > 0) alpha = std::min(alpha, z[idx[k]] / denom);
        }
      for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] += alpha * (s[k] - z[idx[k]]);
      for (std::size_t k = 0; k < idx.size(); ++k)
        if (z[idx[k]] <= tol) {
          z[idx[k]] = 0.0;
          passive[idx[k]] = false;
        }
      bool any = std::any_of(passive.begin(), passive.end(), [](bool b) { return b; });
      if (!any) break;
    }
  }
  return z;
}

double min_eigenvalue(const MatrixXd& S) {
  if (S.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const MatrixXd& S) {
  if (S.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace valfun
