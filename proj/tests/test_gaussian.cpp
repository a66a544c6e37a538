#include <cmath>
#include <random>

#include <doctest.h>

#include "dpt/gaussian.hpp"
#include "dpt/scaling.hpp"

using namespace dpt;
using namespace dpt::gaussian;

namespace {

// Random strictly stable drift of the printed form with isotropic noise.
DriftDiffusion<double> random_stable(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double omega = 0.1 + 2.0 * u(rng);
    const double lambda = u(rng);
    const double gamma = 0.01 + u(rng);
    const double rho = 0.5 * u(rng) * gamma;
    auto dd = drift_from_self_energy(omega, lambda, gamma, std::complex<double>(rho, 0.0));
    if (max_real_eigenvalue(dd.drift) < -1e-6) return dd;
  }
}

}  // namespace

TEST_CASE("damped oscillator drift at lambda = 0") {
  const ModelParams p{1.3, 0.0, 0.2, 0.05};
  const auto dd = drift_diffusion(p, 0.0);
  CHECK(dd.drift(0, 0) == doctest::Approx(-0.2));
  CHECK(dd.drift(1, 1) == doctest::Approx(-0.2));
  CHECK(dd.drift(0, 1) == doctest::Approx(1.3));
  CHECK(dd.drift(1, 0) == doctest::Approx(-1.3));
  CHECK(dd.diffusion.isApprox(0.2 * Eigen::Matrix2d::Identity()));
  const auto sol = solve_lyapunov(dd);
  CHECK(sol.covariance.xx == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sol.covariance.pp == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(sol.covariance.xp) < 1e-14);
  const auto r = gaussian_report(p, 0.0);
  CHECK(std::abs(r.delta_n) < 1e-10);
  CHECK(std::abs(r.delta_m) < 1e-10);
  CHECK(r.purity == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("normal-phase stability boundary sits at lambda_c") {
  for (double kappa1 : {0.0, 0.1, 0.7}) {
    const ModelParams p{1.0, 0.0, kappa1, 1e-3};
    const double lc = critical_lambda(p);
    const double det = kappa1 * kappa1 + 1.0 - 4.0 * lc * lc;
    CHECK(std::abs(det) < 1e-12);
    const auto dd = drift_diffusion(p.with_lambda(lc), 0.0);
    CHECK(std::abs(dd.drift.determinant()) < 1e-12);
  }
}

TEST_CASE("property: closed-form covariance equals the Kronecker Lyapunov solve") {
  std::mt19937 rng(2024);
  for (int draw = 0; draw < 100; ++draw) {
    const auto dd = random_stable(rng);
    const auto closed = closed_form_covariance(dd);
    const auto numeric = lyapunov_numerical(dd.drift, dd.diffusion);
    CHECK((closed - numeric).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, closed.cwiseAbs().maxCoeff()));
    CHECK(lyapunov_residual(dd.drift, dd.diffusion, closed) <= 1e-10 * std::max(1.0, closed.cwiseAbs().maxCoeff()));
    const auto sol = solve_lyapunov(dd);
    CHECK(sol.covariance.uncertainty_product() >= 0.25 - 1e-12);
    CHECK(sol.covariance.purity() > 0.0);
    CHECK(sol.covariance.purity() <= 1.0 + 1e-12);
  }
}

TEST_CASE("unstable drift is rejected") {
  auto dd = drift_from_self_energy(1.0, 0.2, -0.1, std::complex<double>(0.0, 0.0));
  dd.diffusion = 0.1 * Eigen::Matrix2d::Identity();
  CHECK_THROWS_AS(solve_lyapunov(dd), UnstableDrift);
  const ModelParams p{1.0, 0.0, 0.1, 1e-9};
  CHECK_THROWS_AS(gaussian_report(p.with_lambda(critical_lambda(p))), UnstableDrift);
}

TEST_CASE("covariance relations hold by construction") {
  const ModelParams p{1.0, 0.49, 0.1, 1e-6};
  const auto r = gaussian_report(p);
  const auto& v = r.covariance;
  CHECK(r.delta_n == doctest::Approx(0.5 * (v.xx + v.pp - 1.0)));
  CHECK(r.delta_m.real() == doctest::Approx(0.5 * (v.xx - v.pp)));
  CHECK(r.delta_m.imag() == doctest::Approx(v.xp));
  const auto back = covariance_from_moments(r.delta_n, r.delta_m);
  CHECK(back.xx == doctest::Approx(v.xx));
  CHECK(back.pp == doctest::Approx(v.pp));
  CHECK(purity_from_moments(r.delta_n, r.delta_m) == doctest::Approx(r.purity));
  CHECK(std::isnan(purity_from_moments(-0.7, 0.0)));
  CHECK(std::isnan(purity_from_moments(0.1, {0.7, 0.0})));
}

TEST_CASE("weak normal phase: eps delta_n approaches lambda_c / 4") {
  const ModelParams base{1.0, 0.0, 0.1, 1e-9};
  const double lc = critical_lambda(base);
  const double eps = 1e-6;
  const auto r = gaussian_report(base.with_lambda(lc - eps));
  CHECK(eps * r.delta_n == doctest::Approx(lc / 4.0).epsilon(0.01));
  CHECK(r.adr / eps == doctest::Approx(4.0 * lc / 0.1).epsilon(0.02));
}

TEST_CASE("strong normal phase is marginal with vanishing Im delta_m and ADR") {
  const ModelParams base{1.0, 0.0, 0.0, 1e-9};
  for (double eps : {1e-6, 1e-3, 0.1}) {
    const auto r = gaussian_report(base.with_lambda(0.5 - eps));
    CHECK(r.marginal);
    CHECK(r.delta_m.imag() == 0.0);
    CHECK(r.adr == 0.0);
    CHECK(r.covariance.uncertainty_product() >= 0.25 - 1e-12);
  }
}

TEST_CASE("asymptotic eps laws on both sides of lambda_c") {
  const ModelParams weak{1.0, 0.0, 0.1, 1e-9};
  const double lc = critical_lambda(weak);
  const auto wn = table1_asymptotics(weak, Phase::Normal, 1e-6);
  CHECK(wn.delta_n.coefficient == doctest::Approx(lc / 4));
  CHECK(wn.delta_n.exponent == -1.0);
  CHECK(wn.purity.coefficient == doctest::Approx(std::sqrt(2.0 / lc)));
  CHECK(wn.purity.exponent == 0.5);
  CHECK(wn.adr.coefficient == doctest::Approx(4 * lc / 0.1));
  CHECK_FALSE(wn.outside_asymptotic_window);
  CHECK(table1_asymptotics(weak, Phase::Normal, 1e-2).outside_asymptotic_window);

  const ModelParams strong{1.0, 0.0, 0.0, 1e-9};
  const auto sn = table1_asymptotics(strong, Phase::Normal, 1e-6);
  CHECK(sn.adr.vanishes());
  CHECK(sn.im_delta_m.vanishes());
  const auto ss = table1_asymptotics(strong, Phase::Superradiant, 1e-6);
  CHECK(ss.adr.coefficient == doctest::Approx(4.0));
  CHECK(ss.adr.exponent == 0.5);
  CHECK(ss.im_delta_m.exponent == -0.5);
  CHECK_THROWS_AS(table1_asymptotics(strong, Phase::Critical, 0.0), CriticalPoint);
}

TEST_CASE("Gaussian exponents over eps in [1e-8, 1e-4]") {
  struct Row {
    double kappa1;
    Phase phase;
    double im_exponent;
  };
  for (const Row row : {Row{0.1, Phase::Normal, -1.0}, Row{0.1, Phase::Superradiant, -1.0},
                        Row{0.0, Phase::Superradiant, -0.5}}) {
    const ModelParams base{1.0, 0.0, row.kappa1, 1e-9};
    const double lc = critical_lambda(base);
    scaling::ScalingSeries dn, im, mu;
    for (double eps : scaling::logspace(1e-8, 1e-4, 25)) {
      const double lambda = row.phase == Phase::Normal ? lc - eps : lc + eps;
      const auto r = gaussian_report(base.with_lambda(lambda));
      dn.control.push_back(eps);
      im.control.push_back(eps);
      mu.control.push_back(eps);
      dn.values.push_back(r.delta_n);
      im.values.push_back(r.delta_m.imag());
      mu.values.push_back(r.purity);
    }
    CHECK(std::abs(scaling::fit_power_law(dn).exponent + 1.0) <= 0.02);
    CHECK(std::abs(scaling::fit_signed_power_law(im).exponent - row.im_exponent) <= 0.02);
    CHECK(std::abs(scaling::fit_power_law(mu).exponent - 0.5) <= 0.02);
  }
}

TEST_CASE("strong superradiant ADR keeps the square-root exponent with a reported prefactor") {
  const ModelParams base{1.0, 0.0, 0.0, 1e-9};
  const double eps = 1e-8;
  const double adr = gaussian_report(base.with_lambda(0.5 + eps)).adr;
  CHECK(adr / std::sqrt(eps) == doctest::Approx(4.0 - 2.0 * std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("Keldysh frequency integrals reproduce the Lyapunov moments") {
  struct Point {
    double omega, lambda, gamma, rho;
  };
  for (const Point q : {Point{1.0, 0.3, 0.1, 0.0}, Point{1.0, 0.45, 0.2, 0.02}, Point{2.0, 0.5, 0.5, 0.1}}) {
    const auto dd = drift_from_self_energy(q.omega, q.lambda, q.gamma, std::complex<double>(q.rho, 0.0));
    const auto v = solve_lyapunov(dd).covariance;
    const auto k = keldysh_moments(q.omega, q.lambda, q.gamma, q.rho);
    CHECK(k.delta_n == doctest::Approx(v.delta_n()).epsilon(1e-6));
    CHECK(k.delta_m.real() == doctest::Approx(v.delta_m().real()).epsilon(1e-6));
    CHECK(std::abs(k.delta_m.imag() - v.delta_m().imag()) <= 1e-6 * std::max(1.0, std::abs(v.delta_m())));
  }
}
