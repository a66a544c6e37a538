#include "dpt/gaussian.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dpt::gaussian {

DriftDiffusion<double> drift_diffusion(const ModelParams& p, std::complex<double> alpha) {
  const double rho = p.kappa2() * std::norm(alpha);
  auto dd = drift_from_self_energy<double>(p.omega(), p.lambda(), p.kappa1() + 4.0 * rho, {rho, 0.0});
  dd.gauge_angle = alpha == std::complex<double>(0.0, 0.0) ? 0.0 : std::arg(alpha);
  return dd;
}

CovarianceMatrix covariance_from_moments(double delta_n, std::complex<double> delta_m) {
  return {delta_n + 0.5 + delta_m.real(), delta_n + 0.5 - delta_m.real(), delta_m.imag()};
}

double purity_from_moments(double delta_n, std::complex<double> delta_m) {
  const double det = (2.0 * delta_n + 1.0) * (2.0 * delta_n + 1.0) - 4.0 * std::norm(delta_m);
  if (!(2.0 * delta_n + 1.0 > 0.0) || !(det > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 / std::sqrt(det);
}

LyapunovSolution solve_lyapunov(const DriftDiffusion<double>& dd) {
  const double scale = dd.drift.cwiseAbs().maxCoeff() + dd.diffusion.cwiseAbs().maxCoeff();
  const double max_re = max_real_eigenvalue(dd.drift);
  const double tol = 1e-14 * std::max(scale, 1.0);
  if (max_re > tol) throw UnstableDrift("drift has an eigenvalue with positive real part");

  LyapunovSolution sol;
  const Eigen::Matrix2d v = closed_form_covariance(dd);
  sol.covariance = {v(0, 0), v(1, 1), v(0, 1)};
  sol.residual = lyapunov_residual<double>(dd.drift, dd.diffusion, v);
  if (max_re >= -tol) {
    sol.marginal = true;
    sol.oracle_gap = std::numeric_limits<double>::quiet_NaN();
  } else {
    const Eigen::Matrix2d vn = lyapunov_numerical<double>(dd.drift, dd.diffusion);
    sol.oracle_gap = (v - vn).cwiseAbs().maxCoeff();
  }
  return sol;
}

GaussianReport report_from_drift(const DriftDiffusion<double>& dd) {
  const LyapunovSolution sol = solve_lyapunov(dd);
  GaussianReport r;
  r.covariance = sol.covariance;
  r.marginal = sol.marginal;
  r.delta_n = sol.covariance.delta_n();
  r.delta_m = sol.covariance.delta_m();
  r.purity = sol.covariance.purity();
  r.adr = sol.marginal ? 0.0 : std::max(0.0, -max_real_eigenvalue(dd.drift));
  r.gauge_angle = dd.gauge_angle;
  return r;
}

GaussianReport gaussian_report(const ModelParams& p, std::complex<double> alpha) {
  // Roundoff in lambda_c would otherwise turn the singular closed form into a huge finite number.
  if (classify_phase(p) == Phase::Critical && alpha == 0.0)
    throw UnstableDrift("Gaussian fluctuations diverge at lambda_c");
  return report_from_drift(drift_diffusion(p, alpha));
}

GaussianReport gaussian_report(const ModelParams& p) {
  return gaussian_report(p, broken_amplitude(p));
}

Table1Prediction table1_asymptotics(const ModelParams& p, Phase phase, double epsilon) {
  if (phase == Phase::Critical) throw CriticalPoint("eps asymptotics are undefined at lambda_c");
  const double lc = critical_lambda(p);
  const double w = p.omega();
  Table1Prediction t;
  t.symmetry = classify_symmetry(p);
  t.phase = phase;
  t.outside_asymptotic_window = epsilon > 1e-3 * lc;
  if (t.symmetry == SymmetryClass::Weak) {
    // identical on both sides of the transition
    t.delta_n = {lc / 4.0, -1.0};
    t.re_delta_m = {-w / 8.0, -1.0};
    t.im_delta_m = {-p.kappa1() / 8.0, -1.0};
    t.purity = {std::sqrt(2.0 / lc), 0.5};
    t.adr = {4.0 * lc / p.kappa1(), 1.0};
  } else if (phase == Phase::Normal) {
    t.delta_n = {w / 8.0, -1.0};
    t.re_delta_m = {-w / 8.0, -1.0};
    t.im_delta_m = {0.0, 0.0};
    t.purity = {2.0 / std::sqrt(w), 0.5};
    t.adr = {0.0, 0.0};
  } else {
    t.delta_n = {w / 16.0, -1.0};
    t.re_delta_m = {-w / 16.0, -1.0};
    t.im_delta_m = {-std::sqrt(w) / 8.0, -0.5};
    t.purity = {std::sqrt(8.0 / w), 0.5};
    t.adr = {4.0 * std::sqrt(w), 0.5};
  }
  return t;
}

KeldyshMoments keldysh_moments(double omega, double lambda, double gamma, double rho) {
  using cd = std::complex<double>;
  using Matrix2c = Eigen::Matrix2cd;
  constexpr cd i{0.0, 1.0};
  auto keldysh = [&](double nu) {
    Matrix2c inv_r;
    inv_r << nu - omega + i * gamma, -2.0 * lambda + 2.0 * i * rho,
        -2.0 * lambda - 2.0 * i * rho, -nu - omega - i * gamma;
    const Matrix2c gr = inv_r.inverse();
    return Matrix2c(gr * (2.0 * i * gamma) * gr.adjoint());
  };
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  auto integrate = [&](auto&& f) { return gauss_kronrod<double, 61>::integrate(f, -inf, inf, 15, 1e-13); };

  // [G^K]_22 is purely imaginary, so only its imaginary part contributes
  const double im22 = integrate([&](double nu) { return keldysh(nu)(1, 1).imag(); });
  const double re12 = integrate([&](double nu) { return keldysh(nu)(0, 1).real(); });
  const double im12 = integrate([&](double nu) { return keldysh(nu)(0, 1).imag(); });
  const double two_pi = 2.0 * std::numbers::pi;

  KeldyshMoments k;
  // -(i/2) * (i im22) / 2pi - 1/2
  k.delta_n = 0.5 * im22 / two_pi - 0.5;
  // Nambu normalization: delta_m = -(i/2) Int dnu/2pi [G^K]_12
  k.delta_m = -0.5 * i * cd(re12, im12) / two_pi;
  return k;
}

}  // namespace dpt::gaussian
