#include "dpt/arnoldi.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/SparseLU>

#include "dpt/errors.hpp"

namespace dpt {

namespace {

double norm1(const SparseMatrixC& a) {
  double best = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMatrixC::InnerIterator it(a, k); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

}  // namespace

ArnoldiResult shift_invert_eigs(const SparseMatrixC& a, std::complex<double> sigma, const ArnoldiOptions& opt) {
  const int n = static_cast<int>(a.rows());
  if (n == 0 || a.cols() != n) throw EigensolverFailure("shift-invert: matrix must be square and non-empty");
  const int nev = std::min(opt.nev, n);
  const int ncv = std::min(n, opt.ncv > 0 ? std::max(opt.ncv, nev + 2) : 2 * nev + 20);

  SparseMatrixC shifted = a;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
  shifted.makeCompressed();
  Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw EigensolverFailure("shift-invert: factorization of A - sigma I failed");

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXcd v0(n);
  for (int i = 0; i < n; ++i) v0[i] = {gauss(rng), gauss(rng)};

  Eigen::MatrixXcd basis(n, ncv + 1);
  Eigen::MatrixXcd hess(ncv + 1, ncv);
  ArnoldiResult out;
  Eigen::VectorXd ritz_res;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    basis.setZero();
    hess.setZero();
    basis.col(0) = v0.normalized();
    int k = ncv;
    for (int j = 0; j < ncv; ++j) {
      Eigen::VectorXcd w = lu.solve(basis.col(j));
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          const std::complex<double> h = basis.col(i).dot(w);
          hess(i, j) += h;
          w -= h * basis.col(i);
        }
      const double beta = w.norm();
      hess(j + 1, j) = beta;
      if (beta <= 1e-14 * hess.col(j).head(j + 1).norm()) {
        k = j + 1;
        break;
      }
      basis.col(j + 1) = w / beta;
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(hess.topLeftCorner(k, k));
    if (es.info() != Eigen::Success) throw EigensolverFailure("shift-invert: Hessenberg eigensolve failed");
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return std::abs(es.eigenvalues()[x]) > std::abs(es.eigenvalues()[y]); });
    const int want = std::min(nev, k);
    const double beta = k < ncv || k == n ? 0.0 : std::abs(hess(k, k - 1));
    ritz_res.resize(want);
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(n);
    out.eigenvalues.resize(want);
    out.eigenvectors.resize(n, want);
    for (int w = 0; w < want; ++w) {
      const std::complex<double> theta = es.eigenvalues()[order[w]];
      const Eigen::VectorXcd y = es.eigenvectors().col(order[w]);
      ritz_res[w] = beta * std::abs(y[k - 1]) / std::max(std::abs(theta), 1e-300);
      Eigen::VectorXcd x = basis.leftCols(k) * y;
      x.normalize();
      out.eigenvectors.col(w) = x;
      out.eigenvalues[w] = sigma + 1.0 / theta;
      next += x;
    }
    out.restarts = restart;
    if (ritz_res.maxCoeff() <= opt.tol) break;
    if (restart == opt.max_restarts) {
      std::ostringstream msg;
      msg << "shift-invert Arnoldi did not converge after " << restart
          << " restarts; worst Ritz residual " << ritz_res.maxCoeff();
      throw EigensolverFailure(msg.str());
    }
    v0 = next.norm() > 0 ? next : Eigen::VectorXcd(basis.col(k - 1));
  }

  const double anorm = std::max(norm1(a), 1e-300);
  out.residuals.resize(out.eigenvalues.size());
  for (Eigen::Index w = 0; w < out.eigenvalues.size(); ++w) {
    const Eigen::VectorXcd x = out.eigenvectors.col(w);
    out.residuals[w] = (a * x - out.eigenvalues[w] * x).norm() / anorm;
  }
  return out;
}

}  // namespace dpt
