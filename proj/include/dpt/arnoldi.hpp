#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dpt {

using SparseMatrixC = Eigen::SparseMatrix<std::complex<double>>;

struct ArnoldiOptions {
  int nev = 8;
  /// Krylov dimension; 0 picks 2 nev + 20.
  int ncv = 0;
  int max_restarts = 200;
  /// Relative Ritz residual required on every wanted pair.
  double tol = 1e-10;
};

struct ArnoldiResult {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  /// ||A x - lambda x|| / ||A||_1 for each returned pair.
  Eigen::VectorXd residuals;
  int restarts = 0;
};

/// Eigenvalues of a sparse complex matrix closest to sigma, by Arnoldi iteration on
/// (A - sigma I)^{-1} with explicit restarts. Deterministic start vector.
/// Throws EigensolverFailure when the factorization is singular or the Ritz pairs do not converge.
ArnoldiResult shift_invert_eigs(const SparseMatrixC& a, std::complex<double> sigma, const ArnoldiOptions& opt = {});

}  // namespace dpt
