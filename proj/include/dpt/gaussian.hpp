#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "dpt/errors.hpp"
#include "dpt/model.hpp"

namespace dpt::gaussian {

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/// Linearized quadrature dynamics dR/dt = A R + eta, <eta eta^T> = D delta(t - t'),
/// for R = (X, P) with X = (da + da^dag)/sqrt2, P = (da - da^dag)/(i sqrt2).
template <typename Scalar>
struct DriftDiffusion {
  Matrix2<Scalar> drift;
  Matrix2<Scalar> diffusion;
  Scalar rho_eff{0};
  Scalar gamma{0};
  /// Phase of the condensate that was rotated away (0 in the normal phase).
  Scalar gauge_angle{0};
};

/// General form used by both the Gaussian and the loop-corrected theory:
/// damping gamma, complex squeezing shift rho. Real rho reproduces
/// A = [[-(gamma + 2 rho), omega - 2 lambda], [-(omega + 2 lambda), -(gamma - 2 rho)]], D = gamma I.
template <typename Scalar>
DriftDiffusion<Scalar> drift_from_self_energy(Scalar omega, Scalar lambda, Scalar gamma,
                                              std::complex<Scalar> rho) {
  DriftDiffusion<Scalar> dd;
  const Scalar two(2);
  dd.drift << -(gamma + two * rho.real()), omega - two * lambda - two * rho.imag(),
      -(omega + two * lambda + two * rho.imag()), -(gamma - two * rho.real());
  dd.diffusion = gamma * Matrix2<Scalar>::Identity();
  dd.rho_eff = rho.real();
  dd.gamma = gamma;
  return dd;
}

/// Drift and diffusion around the mean-field amplitude alpha:
/// rho = kappa2 |alpha|^2, Gamma = kappa1 + 4 rho.
DriftDiffusion<double> drift_diffusion(const ModelParams& p, std::complex<double> alpha);

/// Eigenvalues of a real 2x2 matrix from trace and determinant (exact zero real part for traceless A).
template <typename Scalar>
std::pair<std::complex<Scalar>, std::complex<Scalar>> eigenvalues(const Matrix2<Scalar>& a) {
  const Scalar half_trace = a.trace() / Scalar(2);
  const Scalar disc = half_trace * half_trace - a.determinant();
  if (disc >= Scalar(0)) {
    const Scalar s = std::sqrt(disc);
    return {{half_trace + s, Scalar(0)}, {half_trace - s, Scalar(0)}};
  }
  const Scalar s = std::sqrt(-disc);
  return {{half_trace, s}, {half_trace, -s}};
}

template <typename Scalar>
Scalar max_real_eigenvalue(const Matrix2<Scalar>& a) {
  const auto [l1, l2] = eigenvalues(a);
  return std::max(l1.real(), l2.real());
}

/// Closed-form solution of A V + V A^T + D = 0 for
/// A = [[-c1, Omega1], [-Omega2, -c2]] and D = c3 I.
/// The noise-to-damping ratio c3/(c1 + c2) takes its physical limit 1/2 when c1 = c2 = c3 = 0.
template <typename Scalar>
Matrix2<Scalar> closed_form_covariance(const DriftDiffusion<Scalar>& dd) {
  const Matrix2<Scalar>& a = dd.drift;
  const Matrix2<Scalar>& d = dd.diffusion;
  if (d(0, 1) != Scalar(0) || d(1, 0) != Scalar(0) || d(0, 0) != d(1, 1))
    throw InvalidParameter("closed-form covariance needs isotropic diffusion");
  const Scalar o1 = a(0, 1);
  const Scalar o2 = -a(1, 0);
  const Scalar c1 = -a(0, 0);
  const Scalar c2 = -a(1, 1);
  const Scalar c3 = d(0, 0);

  Scalar ratio;
  if (c1 + c2 != Scalar(0)) {
    ratio = c3 / (c1 + c2);
  } else if (c3 == Scalar(0)) {
    ratio = Scalar(1) / Scalar(2);
  } else {
    throw UnstableDrift("closed-form covariance: zero total damping with finite noise");
  }
  const Scalar den = o1 * o2 + c1 * c2;
  if (den == Scalar(0)) throw UnstableDrift("closed-form covariance: singular at the critical point");

  Matrix2<Scalar> v;
  const Scalar scale = ratio / (Scalar(2) * den);
  v(0, 0) = scale * (o1 * o1 + o1 * o2 + c1 * c2 + c2 * c2);
  v(1, 1) = scale * (o1 * o2 + o2 * o2 + c1 * c1 + c1 * c2);
  v(0, 1) = v(1, 0) = scale * (o1 * c1 - o2 * c2);
  return v;
}

/// Numerical Lyapunov solve through the 4x4 Kronecker system (I (x) A + A (x) I) vec V = -vec D.
template <typename Scalar>
Matrix2<Scalar> lyapunov_numerical(const Matrix2<Scalar>& a, const Matrix2<Scalar>& d) {
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
  using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
  Matrix4 k = Matrix4::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) {
        // column-major vec index of V(i, j) is i + 2 j
        k(i + 2 * j, l + 2 * j) += a(i, l);
        k(i + 2 * j, i + 2 * l) += a(j, l);
      }
  const Vector4 rhs = -Eigen::Map<const Vector4>(d.data());
  const Vector4 x = k.fullPivLu().solve(rhs);
  Matrix2<Scalar> v = Eigen::Map<const Matrix2<Scalar>>(x.data());
  return Scalar(0.5) * (v + v.transpose());
}

template <typename Scalar>
Scalar lyapunov_residual(const Matrix2<Scalar>& a, const Matrix2<Scalar>& d, const Matrix2<Scalar>& v) {
  return (a * v + v * a.transpose() + d).cwiseAbs().maxCoeff();
}

struct CovarianceMatrix {
  double xx = 0.5;
  double pp = 0.5;
  double xp = 0.0;

  Eigen::Matrix2d matrix() const { return (Eigen::Matrix2d() << xx, xp, xp, pp).finished(); }
  double uncertainty_product() const { return xx * pp - xp * xp; }

  double delta_n() const { return 0.5 * (xx + pp - 1.0); }
  std::complex<double> delta_m() const { return {0.5 * (xx - pp), xp}; }
  /// 1 / sqrt(4 <X^2><P^2> - <XP + PX>^2).
  double purity() const { return 1.0 / std::sqrt(4.0 * uncertainty_product()); }
};

CovarianceMatrix covariance_from_moments(double delta_n, std::complex<double> delta_m);
/// Purity of the Gaussian state with the given fluctuations; NaN when the moments are unphysical.
double purity_from_moments(double delta_n, std::complex<double> delta_m);

struct LyapunovSolution {
  CovarianceMatrix covariance;
  /// Drift has eigenvalues on the imaginary axis; only the closed form was evaluated.
  bool marginal = false;
  /// ||V_closed - V_numerical||_inf, NaN when marginal.
  double oracle_gap = 0.0;
  double residual = 0.0;
};

/// Closed form is returned; the Kronecker solution is computed alongside as an oracle.
/// Throws UnstableDrift when A has an eigenvalue with positive real part, or when the
/// closed form is singular.
LyapunovSolution solve_lyapunov(const DriftDiffusion<double>& dd);

struct GaussianReport {
  double delta_n = 0.0;
  std::complex<double> delta_m;
  double purity = 1.0;
  double adr = 0.0;
  double gauge_angle = 0.0;
  bool marginal = false;
  CovarianceMatrix covariance;
};

GaussianReport report_from_drift(const DriftDiffusion<double>& dd);
GaussianReport gaussian_report(const ModelParams& p, std::complex<double> alpha);
/// Uses the stable mean-field branch: alpha = 0 in the normal phase, +alpha in the superradiant one.
GaussianReport gaussian_report(const ModelParams& p);

struct Prediction {
  double coefficient = 0.0;
  double exponent = 0.0;
  double value(double control) const { return coefficient * std::pow(control, exponent); }
  bool vanishes() const { return coefficient == 0.0; }
};

struct Table1Prediction {
  SymmetryClass symmetry = SymmetryClass::Weak;
  Phase phase = Phase::Normal;
  Prediction delta_n;
  Prediction re_delta_m;
  Prediction im_delta_m;
  Prediction purity;
  Prediction adr;
  /// eps exceeds 1e-3 lambda_c, where the leading-order forms are not trustworthy.
  bool outside_asymptotic_window = false;
};

/// Leading coefficients and exponents in eps = |lambda - lambda_c| for one (symmetry, phase) row.
/// Throws CriticalPoint for Phase::Critical.
Table1Prediction table1_asymptotics(const ModelParams& p, Phase phase, double epsilon);

/// Cross-check of the Lyapunov route: frequency integrals of the Keldysh function
/// G^K = G^R (2 i Gamma) G^A built from the inverse retarded function with damping Gamma
/// and real squeezing shift rho.
struct KeldyshMoments {
  double delta_n = 0.0;
  std::complex<double> delta_m;
};
KeldyshMoments keldysh_moments(double omega, double lambda, double gamma, double rho);

}  // namespace dpt::gaussian
