#pragma once

#include <Eigen/Dense>

namespace valfun {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Numerical rank: singular values above both tol * sigma_max and 1e-12 count.
int rank(const MatrixXd& M, double tol = 1e-8);

/// Orthonormal basis (columns) of the null space {z : M z = 0}.
MatrixXd null_space(const MatrixXd& M, double tol = 1e-8);

/// Orthonormal basis (columns) of the row space of M.
MatrixXd row_space(const MatrixXd& M, double tol = 1e-8);

/// Minimum-norm least-squares solution of M z = rhs.
VectorXd min_norm_solve(const MatrixXd& M, const VectorXd& rhs, double tol = 1e-10);

/// Nonnegative least squares  min ||M z - rhs||  s.t.  z >= 0  (Lawson-Hanson).
VectorXd nnls(const MatrixXd& M, const VectorXd& rhs, int max_iter = 500);

/// Smallest and largest eigenvalues of a symmetric matrix (0 for an empty one).
double min_eigenvalue(const MatrixXd& S);
double max_eigenvalue(const MatrixXd& S);

}  // namespace valfun
